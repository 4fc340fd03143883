"""Aircraft maintenance staffing: instance generation and a steady-state EA solver."""

from .chromosome import Gene, StaffEntry, UnsolvableInstanceError
from .decoder import (
    DecoderOptions,
    FitnessReport,
    Schedule,
    check_schedule,
    decode,
    evaluate,
    export_schedule,
)
from .domain import (
    Aircraft,
    Certification,
    ProblemInstance,
    StaffSlotRequirement,
    Technician,
    WorkOrderDef,
    WorkPackageDef,
    qualified_staff,
    total_man_hours,
)
from .ea import EaParams, Individual, RunResult, crossover, init_individual, mutate, run_ea, tournament_select
from .generator import GeneratorConfig, batch_config, generate_batch, generate_instance, instance_statistics, validate_instance
from .oracle import brute_force_solve

__version__ = "0.1.0"
