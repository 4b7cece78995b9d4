"""Interchain timestamping: simulation, forensics and optimality analysis."""
