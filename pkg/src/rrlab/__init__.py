"""rrlab: a desk-scale neural program-repair laboratory.

A sequence-to-sequence patch generator for a toy language (MiniLang) is
trained in two phases: token-level cross-entropy ("syntactic"), then a
second phase in which every candidate patch is compiled and executed and
the resulting reward rescales the loss before backpropagation ("semantic").
"""

__version__ = "0.1.0"
