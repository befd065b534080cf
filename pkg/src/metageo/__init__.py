"""Exact and approximate geodesics in wreath products ``A wr Z^r`` and free metabelian groups."""

from .lattice_tsp import (
    WalkInstance,
    WalkSolution,
    approx_walk,
    exact_walk_held_karp,
    exact_walk_line,
    manhattan,
    permutation_bruteforce,
)
from .metabelian import (
    Flow,
    bfs_geodesic_oracle_metabelian,
    check_kirchhoff,
    compute_flow,
    geodesic_length_2approx,
    geodesic_length_exact,
    geodesic_word_metabelian,
    metabelian_equal,
    support_components,
)
from .steiner import (
    GroupSteinerInstance,
    LatticeEdge,
    SteinerInstance,
    TreeResult,
    group_steiner_exact,
    group_steiner_via_representatives,
    mst_terminals_approx,
    representative_reduction,
    rsmt_exact,
)
from .words import Alphabet, Word, concat, format_word, free_reduce, invert, parse_word
from .wreath import (
    GroupSpec,
    WreathElement,
    bfs_geodesic_oracle_wreath,
    evaluate,
    geodesic_length_wreath,
    geodesic_word_wreath,
    lamp_geodesic_length,
    normal_form,
    parse_group_spec,
)

__version__ = "0.1.0"
