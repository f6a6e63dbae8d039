"""
kirchhoff-lab
Herramientas numéricas para problemas variacionales de Kirchhoff degenerados
"""

__version__ = "1.0.1"
