"""Strong-law analysis and simulation of balanced triangular urn models."""
