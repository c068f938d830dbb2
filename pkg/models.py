"""
Domain enums shared by configs, containers and reports
"""
import enum


class Activation(str, enum.Enum):
    TANH = "tanh"
    IDENTITY = "identity"


class ProblemKind(str, enum.Enum):
    CONVECTION = "convection"
    EIGEN = "eigen"
    TOY = "toy"


class EigenVariant(str, enum.Enum):
    COPHY = "cophy"
    BLACK_BOX = "black_box"
    LABEL_FREE = "label_free"


class SchemeKind(str, enum.Enum):
    EW = "EW"
    CW = "CW"
    DWA = "DWA"
    RLW = "RLW"
    LR_ANNEALING = "LR_annealing"
    GRADNORM = "GradNorm"


class AnchorMode(str, enum.Enum):
    NONE = "none"
    POLAR = "polar"
    CENTER = "center"
    CIRCLE = "circle"


class Method(str, enum.Enum):
    VISUALIZER = "visualizer"
    PCA = "pca"
    KPCA = "kpca"


class ErrorKind(str, enum.Enum):
    LOSS_ERROR = "loss_error"
    PARAM_DISTANCE = "param_distance"


class LevelSpacing(str, enum.Enum):
    LINEAR = "linear"
    LOG = "log"


class SectionTag(bytes, enum.Enum):
    """Four-byte section tags of the NVTJ container"""
    TRAJECTORY = b"TRAJ"
    VISUALIZER = b"VISM"
    PCA = b"BPCA"
    KPCA = b"BKPC"
