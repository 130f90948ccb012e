"""dyntok: batch-adaptive token stream compression and its supporting cast.

Submodules
----------
corpus      token/stream data model, pre-tokenization, base BPE application
merger      batch-level dynamic merging, solvers, sampling, scoring plans
embeddings  embedding tables, composition providers, LRU cache, binary I/O
expansion   BPE training, vocabulary union/concat, longest-prefix tokenization
index       IVF approximate nearest-neighbor retrieval plus exhaustive oracle
analytics   sequence-length statistics and FLOPs-per-sample estimates
cli         the ``dyntok`` command-line entry point
"""

from ._merge import KERNEL_NAME

__version__ = "0.1.0"

__all__ = ["KERNEL_NAME", "__version__"]
