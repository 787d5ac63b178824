"""Computation layer: groups, origamis, flat geometry, Veech groups, dessins and ledgers."""
