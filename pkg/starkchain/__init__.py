"""
StarkChain: a non-Hermitian Stark chain with graded nonreciprocal hopping.

Similarity gauge, asymptotic branches, biorthogonal spectra and Gaussian
free-fermion entanglement dynamics, exported as reproducible CSV/JSON.
"""

__version__ = "1.0.0"
