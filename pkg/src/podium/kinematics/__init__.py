from podium.kinematics.errors import (
    DegenerateInput,
    KinematicsError,
    ManifestError,
    MissingSensor,
    UnmappedJoint,
    ZeroNorm,
)
from podium.kinematics.ik import IKTargets, TwoBoneSolution, solve_ik_pose, solve_two_bone
from podium.kinematics.retarget import SensorFrame, identity_frame, retarget
from podium.kinematics.skeleton import (
    SensorId,
    SkeletonManifest,
    default_manifest,
    load_manifest,
    load_manifest_dict,
)
