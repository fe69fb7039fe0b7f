"""Exact symbolic geometry: expressions, Poisson pencils, contact charts."""

from .contact import (
    ContactChart,
    UnsupportedChartError,
    chart_from_form,
    contact_nondegeneracy,
    contact_vector_field,
    correspondence_residual,
    dissipated_quantity_check,
    homogeneous_lift,
    jacobi_bracket,
    rank_of_differentials,
    standard_chart,
    symplectization,
)
from .expr import differentiate, is_zero, parse, restrict, to_text, zero_test
from .poisson import (
    ChartError,
    PoissonStructure,
    bihamiltonian_check,
    build_pencil,
    hamiltonian_vector_field,
    homogeneity_degree,
    jacobiator,
    jacobiator_on_coordinates,
    poisson_bracket,
)
