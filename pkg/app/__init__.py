"""
Singular p-Laplacian Toolkit — основной пакет.

Радиальные решения −Δₚu = λu^(−δ) + u^q в единичном шаре:
сетка и оператор, чисто сингулярная задача, две ветви решений,
численные проверки и командная строка.
"""

__version__ = "0.1.0"
