"""vhap: voxmap-pointshell virtual assembly verification.

Subsystems:

* ``geometry``   — mesh loading, rigid poses.
* ``volumetric`` — voxmap / pointshell construction and cooking.
* ``vps``        — the kilohertz contact + virtual-coupling render loop.
* ``device``     — dual-arm handle kinematics, statics, force limits.
* ``protocol``   — binary UDP packet format, endpoints, in-process channels.
* ``harness``    — scenario runner, trace/report output.

The hot kernels run compiled (Cython) when the extension is available and
fall back to numpy otherwise; see ``vhap.kernel_backend()``.
"""

from vhap import _kernels


def kernel_backend() -> str:
    """Name of the kernel lane selected at import: 'compiled' or 'python'."""
    return _kernels.backend_name()


__version__ = "0.1.0"
