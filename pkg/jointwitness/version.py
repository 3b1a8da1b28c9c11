__version__ = "0.1.0"

CHANGELOG = """
# jointwitness Changelog

## v0.1.0 - Initial Release
- Bloch-vector states, density matrices and pure states of any dimension
- Four-outcome joint measurement of sigma_x and sigma_y with tunable strength eta
- Marginal inversion and retrieval of the joint quasi-distribution
- Negativity witness with automatic choice of eta in canonical axes
- Separability check of the observed statistics by linear programming
- Shot-noise simulation with 5-sigma certification of negativity
- CLI: witness, separability, sweep, sample, history and changelog commands
- Optional run history in sqlite
"""
