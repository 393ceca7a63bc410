from hypothesis import HealthCheck, settings

# numerics-heavy properties: generous deadlines, moderate example counts
settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")
