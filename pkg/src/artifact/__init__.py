"""Length-constrained flows, moving cuts and their applications."""
