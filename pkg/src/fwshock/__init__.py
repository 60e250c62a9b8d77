"""Discontinuous traveling waves of the Fornberg-Whitham equation.

Shooting in the traveling-wave phase plane, matching of the two saddle
orbits across a jump, weak-solution verification and a finite-volume
PDE check.
"""

from fwshock.kernel import GridFunction, KernelQuadratureConfig, convolve_K, convolve_Kprime
from fwshock.matcher import JumpData, match_algebraic, match_on_trajectories
from fwshock.phase_plane import PlanarPoint, WaveParams, make_params
from fwshock.profile import Profile, ShockProfile, integrate_profile_direct, reconstruct_profile
from fwshock.shooting import ShootingConfig, Trajectory, shoot_P, shoot_Q

__all__ = [
    "GridFunction",
    "JumpData",
    "KernelQuadratureConfig",
    "PlanarPoint",
    "Profile",
    "ShockProfile",
    "ShootingConfig",
    "Trajectory",
    "WaveParams",
    "convolve_K",
    "convolve_Kprime",
    "integrate_profile_direct",
    "make_params",
    "match_algebraic",
    "match_on_trajectories",
    "reconstruct_profile",
    "shoot_P",
    "shoot_Q",
]
