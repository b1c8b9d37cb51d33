"""3D lesion radiomics, vessel tortuosity features and tree-ensemble response prediction."""

__version__ = "0.1.0"
