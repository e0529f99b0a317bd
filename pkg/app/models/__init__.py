"""Graph, class-system, embedding and star-system models."""
