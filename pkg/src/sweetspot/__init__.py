"""Data-driven sweet-spot workflow for shale plays."""
