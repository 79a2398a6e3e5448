"""Closed embeddings of finite lattices into lattices of transformation monoids.

The construction labels a truncated index tree with the non-bottom
elements of a finite lattice, attaches to every tree node a permutation of
``ground x Z`` built from an independent family of sets, and sends each
ideal of the compact join-semilattice to the monoid generated by the
permutations whose label lies in the ideal.  Every module also carries the
checks that the construction behaves as claimed on the truncation.
"""

from .embedding import (
    Embedding,
    IndexedMonoid,
    factorize,
    member,
    member_by_expansion,
    monoid_enumerate,
    verify_bottom,
    verify_injectivity,
    verify_join_preservation,
    verify_meet_preservation,
    verify_no_inverses,
)
from .enumeration import Labeling, decomposition_pairs, required_branching, verify_enumeration
from .errors import (
    ConfigurationError,
    ConstructionError,
    DomainError,
    LatticeError,
    NotALatticeError,
    OrderError,
    ResourceError,
    TruncationError,
)
from .family import BitRegistry, Cube, ExplicitGround, Literal, b_cube, separating_point, sharp_literal
from .ice import (
    CountingVector,
    IceInstance,
    Point,
    canonical_key,
    verify_commutativity,
    verify_composition,
    verify_independence,
    verify_unique_representation,
)
from .lattice import (
    CATALOG,
    CompactSemilattice,
    FiniteLattice,
    Ideal,
    catalog_lattice,
    ideal_join,
    ideal_lattice_iso_check,
    ideal_meet,
    ideals_enumerate,
    load_lattice,
    load_lattice_file,
)
from .tree import (
    IDENTITY,
    Node,
    TruncationConfig,
    Word,
    children,
    equivalent,
    expand_once,
    is_initial_segment,
    is_reduced,
    normal_forms,
    reduce_canonical,
)

__version__ = "0.1.0"
