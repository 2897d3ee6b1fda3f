# services/__init__.py
"""
Service modules for the de Bruijn entropy toolkit

- quiver_service: de Bruijn quiver construction and quiver algebra
- entropy_service: Euler-circuit class counts and entropies
- oracle_service: brute-force ground truth for small instances
- similarity_service: distance matrices, linkage and Newick export
- spin_service: binary spin-chain partition functions
- io_service: FASTA, GenBank, CSV and Newick input and output
- pipeline_service: end-to-end corpus comparison
"""

from .quiver_service import build_quiver, boxminus, boxplus, concat_quiver, strongly_connected_components
from .entropy_service import (
    KMode,
    binary_W1_closed_form,
    componentwise_entropy,
    eulerian_entropy,
    log_spanning_trees,
    relative_entropy,
    suggest_k,
    word_entropy,
)
from .similarity_service import annotate_clades, distance_matrix, levenshtein, linkage, newick_export
from .pipeline_service import CorpusPipeline

__all__ = [
    'build_quiver',
    'boxminus',
    'boxplus',
    'concat_quiver',
    'strongly_connected_components',
    'KMode',
    'binary_W1_closed_form',
    'componentwise_entropy',
    'eulerian_entropy',
    'log_spanning_trees',
    'relative_entropy',
    'suggest_k',
    'word_entropy',
    'annotate_clades',
    'distance_matrix',
    'levenshtein',
    'linkage',
    'newick_export',
    'CorpusPipeline',
]

__version__ = '1.0.0'
