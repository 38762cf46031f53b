"""Intent refinement: natural language to Nile to service-chain commands."""

__version__ = "0.1.0"
