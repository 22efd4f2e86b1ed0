"""Absolute-value preconditioning for the shifted Laplacian ``L - c^2 I``.

The main entry points are :func:`avprec.grid.build_hierarchy`,
:class:`avprec.avmg.AVMGPreconditioner` and :func:`avprec.krylov.pminres`.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
