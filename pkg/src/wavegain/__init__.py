"""Learnable complex subband gains in the dual-tree complex wavelet domain.

The package provides, bottom-up: dense tensor plumbing (:mod:`core`), filter
coefficient tables (:mod:`filters`), 1-D multirate primitives with exact
adjoints (:mod:`multirate`), the 2-D dual-tree transform and its transposes
(:mod:`transform`), the learnable gain layer with hand-derived
backpropagation (:mod:`gainlayer`), a minimal CNN training stack
(:mod:`nn`), CIFAR ingestion (:mod:`data`), verification suites
(:mod:`verify`) and a CLI (:mod:`cli`).
"""

__version__ = "0.1.0"

from .core import ComplexPair, complex_mul, inner_product
from .filters import FilterSet, load_filter_set
from .gainlayer import (GainParams, build_dense_operator, corr_dof,
                        gain_backward, gain_forward, gain_init,
                        impulse_response)
from .multirate import (filter_decimate, filter_decimate_adjoint,
                        upsample_filter, upsample_filter_adjoint)
from .transform import (Pyramid, dtcwt_forward, dtcwt_forward_adjoint,
                        dtcwt_inverse, dtcwt_inverse_adjoint, mac_count)

__all__ = [
    "ComplexPair", "complex_mul", "inner_product",
    "FilterSet", "load_filter_set",
    "GainParams", "gain_init", "gain_forward", "gain_backward",
    "build_dense_operator", "corr_dof", "impulse_response",
    "filter_decimate", "filter_decimate_adjoint",
    "upsample_filter", "upsample_filter_adjoint",
    "Pyramid", "dtcwt_forward", "dtcwt_inverse",
    "dtcwt_forward_adjoint", "dtcwt_inverse_adjoint", "mac_count",
    "__version__",
]
