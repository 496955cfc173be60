"""Kernel backend selection.

The compiled backend (bidbg._speedups, built from Cython) is preferred; the
numpy backend is the always-available fallback.  Set BIDBG_KERNELS=python or
BIDBG_KERNELS=compiled to force one; forcing the compiled backend when the
extension is missing raises so benchmarks cannot silently compare python
against itself.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("BIDBG_KERNELS", "").strip().lower()

if _FORCED == "python":
    _impl = _kernels_py
elif _FORCED == "compiled":
    from . import _speedups as _impl  # noqa: F401
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND

encode_codes = _impl.encode_codes
pack_words = _impl.pack_words
revcomp_words = _impl.revcomp_words
edge_records_for_codes = _impl.edge_records_for_codes
record_sort_keys = _impl.record_sort_keys
radix_sort_records = _impl.radix_sort_records
radix_sort_words = _impl.radix_sort_words
dedup_sorted_records = _impl.dedup_sorted_records
merge_record_streams = _impl.merge_record_streams

ORI_O1 = _kernels_py.ORI_O1
ORI_O2 = _kernels_py.ORI_O2
ORI_SELF_LOOP = _kernels_py.ORI_SELF_LOOP


def backend_module(name: str):
    """Explicit backend fetch for side-by-side benchmarking."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _speedups
        return _speedups
    raise ValueError("unknown kernel backend %r" % name)
