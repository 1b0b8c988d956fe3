"""raggate: threshold-gated hybrid retrieval-augmented question answering.

A local vector knowledge base answers queries when its best similarity
clears a calibrated threshold; otherwise pluggable web search results are
merged in and qualifying documents are folded back into the knowledge base.
Prompts carry temporal grounding and citations for a pluggable generation
backend.
"""

__version__ = "0.1.0"
