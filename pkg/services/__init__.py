"""Service layer: instance model, exact solver, Pareto engine and bench harness."""

__all__ = [
    "bench",
    "instance_loader",
    "instance_model",
    "instance_store",
    "pareto_engine",
    "result_codec",
    "scalar_solver",
]
