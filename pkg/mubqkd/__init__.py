from .__meta__ import version as __version__

from .rng import check_seed, seed_sequence, generator, as_generator, as_seed
from .bases import MAX_DIMENSION, TOLERANCE, EXACT_TOLERANCE, BasisError, DimensionMismatch, Diagnostic, \
    ComplexVector, Basis, BasisPair, AngleParams, check_dimension, inner_product, validate_basis, \
    computational_basis, fourier_mub_basis, rotation_basis_2d, hadamard_mub_4, interpolated_g_basis, \
    random_haar_basis, random_haar_bases, rotation_pair_2d, fourier_mub_pair, mutual_unbiasedness, \
    are_mutually_unbiased
from .error_rates import ErrorRateReport, squared_overlaps, p_iter_general, p_iter_simplified, p_ic, p_qber, \
    p_ic_ideal, p_iter_n2_analytic, p_iter_n4_alpha, p_iter_mub_analytic, p_success, rates_report, \
    pair_upper_bound, batch_p_iter, batch_p_qber
from .protocol import E, F, KEY_BIT, DISCARDED, MeasurementError, ProtocolError, RoundInput, SiftRecord, \
    SimulationSummary, Simulator, born_measure, run_round, simulate, extract_key, standard_error
from .search import ITER, QBER, SearchConfig, SearchResult, Table4Row, min_over_g, double_optimize, table3_row, \
    fig1_scatter, iter_ceiling, mub_scan, fig3_scatter, fig3_alpha_overlay
from .serialize import FormatError, basis_to_dict, basis_from_dict, dump_basis, load_basis, write_records, \
    read_records, write_csv, write_json
