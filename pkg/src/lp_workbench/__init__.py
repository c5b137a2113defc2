"""lp-workbench: exact checks on L^p operator algebras of finite groupoids and their relatives."""

__version__ = "1.0.0"
