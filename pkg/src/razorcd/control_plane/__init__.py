from .core import ControlPlane, Credentials

__all__ = ["ControlPlane", "Credentials"]
