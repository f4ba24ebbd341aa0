from .campaign import (
    STATS_FIELDS, VARIANTS, Campaign, CampaignConfig, CampaignResult, CampaignStats,
    CrashReport, ExecutionResult, SeedEntry, TargetInitFailure, is_interesting,
    run_campaign,
)
from .energy import assign_energy, energy_ratio
from .minimize import NotReproducible, ddmin, minimize_history, replay
from .mutate import WHOLE, enlarge_range, identify_bytes, mutate

__all__ = [
    "STATS_FIELDS", "VARIANTS", "WHOLE", "Campaign", "CampaignConfig", "CampaignResult",
    "CampaignStats", "CrashReport", "ExecutionResult", "NotReproducible", "SeedEntry",
    "TargetInitFailure", "assign_energy", "ddmin", "energy_ratio", "enlarge_range",
    "identify_bytes", "is_interesting", "minimize_history", "mutate", "replay",
    "run_campaign",
]
