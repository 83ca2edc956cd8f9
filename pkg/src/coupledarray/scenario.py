"""Link scenarios between a base-station array and a single-antenna mobile."""

from dataclasses import dataclass, field, replace
import enum
import math

from .errors import DomainError
from .geometry import ArrayGeometry
from .multiport import ANTENNA_NOISE_ONLY, NoiseModel, TerminationModel

__all__ = ["LinkDirection", "LinkScenario"]


class LinkDirection(enum.Enum):
    DOWNLINK = "downlink"  # base station transmits: N = N_BS, M = 1
    UPLINK = "uplink"  # mobile transmits: N = 1, M = N_BS


@dataclass(frozen=True)
class LinkScenario:
    """One base-station/mobile link.

    Attributes
    ----------
    bs : ArrayGeometry
        Base-station array (z = 0 plane).
    mobile_distance : float
        Distance d_bm from the array centre to the mobile, in wavelengths.
    mobile_azimuth : float
        Azimuth of the mobile in the z = 0 plane (radians).
    gamma : float
        Antenna loss factor; every antenna gets gamma * R_r in series.
    termination, noise
        Termination and receiver noise, shared by both ends of the link.
    direction : LinkDirection
    reference_position : tuple of float
        Where the single lossless reference antenna sits (default: array centre).
    """

    bs: ArrayGeometry
    mobile_distance: float
    mobile_azimuth: float = 0.0
    gamma: float = 1e-3
    termination: TerminationModel = field(default_factory=TerminationModel)
    noise: NoiseModel = ANTENNA_NOISE_ONLY
    direction: LinkDirection = LinkDirection.DOWNLINK
    reference_position: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.mobile_distance > 0 and math.isfinite(self.mobile_distance)):
            raise DomainError(f"d_bm must be positive and finite, got {self.mobile_distance!r}")
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be >= 0, got {self.gamma!r}")
        if len(self.reference_position) != 3 or self.reference_position[2] != 0:
            raise DomainError("reference_position must be a point in the z = 0 plane")

    def downlink(self):
        return replace(self, direction=LinkDirection.DOWNLINK)

    def uplink(self):
        return replace(self, direction=LinkDirection.UPLINK)
