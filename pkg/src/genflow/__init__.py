"""GenFlow: workflow retrieval, dependency resolution, and deterministic
node-graph execution with a natural-language search front end."""

__version__ = "0.1.0"
