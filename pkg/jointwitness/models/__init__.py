from jointwitness.models.run_record import CertificationRun

__all__ = [
    "CertificationRun"
]
