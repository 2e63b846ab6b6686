"""Boolean-matrix logic programming for metabolic networks.

Bit-packed reachability over reaction networks, knockout phenotype
prediction, and active learning of missing gene-reaction associations.
"""

from .bitmat import BitMatrix, BitVec, DimensionError, bmat_mul, subset_rows, transitive_closure, vecmat_mul
from .datalog import reference_eval
from .harness import (
    DatasetOracle,
    IsoenzymeProblem,
    OracleMiss,
    SyntheticOracle,
    gen_isoenzyme_network,
    run_comparison,
)
from .ie import IEResult, iterate_extension, query, query_pathway
from .learner import (
    EmptyVersionSpaceError,
    RunRecord,
    active_loop,
    compression,
    entropy,
    expected_costs,
    posterior,
    random_loop,
    select_experiment,
)
from .network import Hypothesis, Network, NetworkError, ParseError, emit_datalog, load_network, parse_network
from .phenotype import Experiment, Label, PredictionTable, instance_space, predict, predict_all

__all__ = [
    "BitMatrix", "BitVec", "DimensionError", "bmat_mul", "subset_rows", "transitive_closure", "vecmat_mul",
    "reference_eval",
    "DatasetOracle", "IsoenzymeProblem", "OracleMiss", "SyntheticOracle", "gen_isoenzyme_network", "run_comparison",
    "IEResult", "iterate_extension", "query", "query_pathway",
    "EmptyVersionSpaceError", "RunRecord", "active_loop", "compression", "entropy", "expected_costs",
    "posterior", "random_loop", "select_experiment",
    "Hypothesis", "Network", "NetworkError", "ParseError", "emit_datalog", "load_network", "parse_network",
    "Experiment", "Label", "PredictionTable", "instance_space", "predict", "predict_all",
]
