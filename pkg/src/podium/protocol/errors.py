"""Typed codec errors.

decode() is total: for arbitrary input bytes it either returns an Envelope or
raises one of these (and nothing else).
"""


class ProtocolError(Exception):
    """Base class for every wire-format error."""


class DecodeError(ProtocolError):
    """Base class for errors raised while parsing incoming bytes."""


class BadMagic(DecodeError):
    pass


class BadVersion(DecodeError):
    pass


class TruncatedPayload(DecodeError):
    pass


class UnknownMsgType(DecodeError):
    pass


class InvariantViolation(ProtocolError):
    """A structurally parseable message violates a field invariant.

    Raised on decode for malformed field values (zero-norm quaternion, bad
    enum, length mismatch) and on encode when the caller passes a message
    that breaks its own type contract.
    """
