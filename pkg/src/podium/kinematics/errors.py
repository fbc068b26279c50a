class KinematicsError(Exception):
    """Base class for skeleton/retarget/IK errors."""


class ManifestError(KinematicsError):
    """Skeleton manifest file violates its structural invariants."""


class MissingSensor(KinematicsError):
    """A sensor frame does not contain exactly the full sensor set."""


class UnmappedJoint(KinematicsError):
    """Sensor map and manifest disagree (unknown joint or missing sensor entry)."""


class DegenerateInput(KinematicsError):
    """IK input admits no solution plane (zero bone, unresolvable pole)."""


class ZeroNorm(KinematicsError):
    """Attempted to normalize a near-zero quaternion."""
