"""Concrete sharing schemes, grouped by the distribution they are built on."""
