"""p-adic and q-deformed gamma functions and the Veneziano amplitudes built from them."""

from .errors import (
    CostLimitError,
    DomainError,
    KinematicsError,
    PoleError,
    PrecisionError,
    PrecisionLossError,
    QVenezianoError,
    TruncationError,
)
from .kernels import BACKEND
from .padic import (
    PadicNumber,
    PadicQ,
    Prime,
    from_rational,
    integer_representative,
    padic,
    q_power,
    rational_reconstruction,
)
from .gamma import GammaRequest, GammaValue, gamma_p, gamma_p_int, gamma_pq, gamma_pq_int
from .qseries import (
    QReal,
    TruncationPolicy,
    gamma_q,
    nu_p,
    q_pochhammer,
    q_pochhammer_p,
    ratio_restricted,
    verify_q_binomial,
    verify_ratio_identity,
)
from .amplitudes import (
    AmplitudeResult,
    ChannelSet,
    Kinematics,
    amp_n,
    amp_p,
    amp_pq,
    amp_q_doublesum,
    amp_q_ratio,
    channels,
    mandelstam,
    resonance_scan,
)

__version__ = "0.1.0"
