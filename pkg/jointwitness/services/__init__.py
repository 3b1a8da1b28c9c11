from jointwitness.services.bloch import BlochVector, bloch_to_density, density_to_bloch
from jointwitness.services.inversion import find_witness
from jointwitness.services.separability import separability_feasibility
from jointwitness.services.shots import simulate_certification

__all__ = [
    "BlochVector",
    "bloch_to_density",
    "density_to_bloch",
    "find_witness",
    "separability_feasibility",
    "simulate_certification",
]
