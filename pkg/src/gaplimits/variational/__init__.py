"""Variational functionals, certified M_{k,eta} bounds and sieve-weight sums."""
