"""Two-qubit REE toolkit."""
