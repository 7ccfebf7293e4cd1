from .runtime import ControllerRegistration, ControllerRuntime, ReconcileOutcome
from .deployment import make_deployment_controller
from .nginx import OperatorHost, build_operator_bundle, make_nginx_controller

__all__ = [
    "ControllerRegistration",
    "ControllerRuntime",
    "ReconcileOutcome",
    "make_deployment_controller",
    "make_nginx_controller",
    "build_operator_bundle",
    "OperatorHost",
]
