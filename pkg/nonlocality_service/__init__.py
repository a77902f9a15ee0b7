"""
Svetlichny Nonlocality Service
Genuine four-partite nonlocality of GHZ states near Schwarzschild and
Schwarzschild-de Sitter horizons, with a numeric oracle for arbitrary states
"""

__version__ = "0.1.0"
