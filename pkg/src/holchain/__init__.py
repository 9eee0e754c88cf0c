"""Holomorphs of squarefree Cunningham-product groups.

Submodules:
    arith      -- chain validation and closed-form counting formulas
    algebra    -- element arithmetic in N, Aut(N) and Hol(N)
    permgroup  -- permutation actions, subgroup closure, brute-force oracle,
                  isomorphism testing
    transitive -- structured enumeration of transitive subgroups of Hol(N)
    classify   -- isomorphism classes, |Aut(M,M')|, Hopf-Galois counts, tables
    cli        -- command-line front end
"""

from .arith import Chain, validate_chain, find_chains

__all__ = ["Chain", "validate_chain", "find_chains"]
