"""Line graph aggregation network toolkit.

Thin Python surface over the C++ core: graph fixtures, WL-family refinement
tests, expressivity checks, message-count accounting, desk-scale training and
integrated-gradients edge attribution.
"""

from ._lgan import (
    Graph,
    Dataset,
    __version__,
    brute_force_isomorphic,
    compare_refinements,
    complete_graph,
    cross_validate,
    cycle_graph,
    degree_one_hot,
    disjoint_union,
    ego_subgraph,
    find_theorem2_witness,
    generate_pair,
    lgan_hash_refine,
    line_graph,
    message_counts,
    parse_tu_dataset,
    path_graph,
    refine_1wl,
    refine_set2fwl,
    refine_set2wl,
    star_graph,
    random_model_edge_attribution,
)

__all__ = [
    "Graph",
    "Dataset",
    "__version__",
    "brute_force_isomorphic",
    "compare_refinements",
    "complete_graph",
    "cross_validate",
    "cycle_graph",
    "degree_one_hot",
    "disjoint_union",
    "ego_subgraph",
    "find_theorem2_witness",
    "generate_pair",
    "lgan_hash_refine",
    "line_graph",
    "message_counts",
    "parse_tu_dataset",
    "path_graph",
    "refine_1wl",
    "refine_set2fwl",
    "refine_set2wl",
    "star_graph",
    "random_model_edge_attribution",
]
