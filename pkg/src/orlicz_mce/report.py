from dataclasses import asdict, dataclass, field


@dataclass
class CheckReport:
    """Outcome of a sampled property check.

    `max_violation` is the largest amount by which the checked inequality
    failed (<= 0 means it held everywhere, up to `tol`).
    """

    name: str
    passed: bool
    max_violation: float
    n_samples: int
    tol: float
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)
