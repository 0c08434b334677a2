from bmpe.perturbed import (
    BmpePath,
    ThetaOutOfRange,
    brownian_increments,
    path_rows,
    sample_bmpe_marginal,
    solve_bmpe,
)
from bmpe.besq import (
    BesqLaw,
    BesqPath,
    besq_path,
    besq_paths,
    besq_rows,
    dump_samples,
    load_samples,
    sample_besq_marginal,
)
