from .spec import GeneratedMatrix, MatrixKind, MatrixSpec, SpectrumKind
from .SyntheticS import SyntheticMatrixService, build_spectrum, clustered_dft_spectrum, gen_matrix
from .MatrixMarketS import MatrixMarketService, read_matrix_market, write_matrix_market
