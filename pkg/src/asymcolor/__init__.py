"""asymcolor: exact density measures, obstruction families, and a stack
colorer for two-target edge colorings of sparse random graphs."""

__version__ = "0.1.0"
