"""Executable companion to fine-grained hardness results for attention.

Reference attention kernels, linear-time polynomial attention, vector
decision problems with exact reductions, and attention gadgets that decide
those problems by thresholding attention outputs.
"""
from .attention_ref import AttentionSpec, attention, log_attention
from .gadgets import GadgetBundle, HardnessVariant, decide, evaluate, select_temperature
from .poly_attention import PolySpec, poly_attention, taylor_softmax_attention
from .problems import ProblemInstance, generate, oracle
from .tensor_core import BinaryVectorSet, DenseMatrix, OpCounter, matmul

__version__ = "0.1.0"

__all__ = [
    "AttentionSpec", "attention", "log_attention",
    "GadgetBundle", "HardnessVariant", "decide", "evaluate", "select_temperature",
    "PolySpec", "poly_attention", "taylor_softmax_attention",
    "ProblemInstance", "generate", "oracle",
    "BinaryVectorSet", "DenseMatrix", "OpCounter", "matmul",
]
