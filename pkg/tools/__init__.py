from .qoi_tools import (
    Histogram,
    LorenzCurveData,
    QoISpec,
    reconstruct,
    moment,
    tail_distribution,
    lorenz_curve,
    lorenz_from_density,
    gini,
    hill_tail_index,
    parametric_tail_index,
)
from .report_tools import emit_report

__all__ = [
    'Histogram', 'LorenzCurveData', 'QoISpec', 'reconstruct', 'moment', 'tail_distribution',
    'lorenz_curve', 'lorenz_from_density', 'gini', 'hill_tail_index', 'parametric_tail_index',
    'emit_report',
]
