"""Compiled inner loops for the transfer-matrix propagator.

Each cell carries a constant potential value, so the one-cell propagator of
(y, y') for -y'' + q y = lam^2 y is exact:

    [y ]        [ C      S ] [y ]
    [y'] (x+d) = [-tau*S  C ] [y'] (x),   tau = lam^2 - qbar,

with C = cos(sqrt(tau) d), S = sin(sqrt(tau) d)/sqrt(tau) continued to
tau <= 0 through cosh/sinh and a Taylor branch near tau = 0.  The only error
is the cell-averaging of the potential, which is second order in the cell
width and independent of lam.  The lam-derivative of the state is propagated
alongside using the closed-form tau-derivatives of C and S.
"""

import warnings

import numpy as np

with warnings.catch_warnings():
    # the TBB version probe warns on this platform; the workqueue/omp layers
    # numba falls back to are equally fine for our prange use
    warnings.simplefilter("ignore")
    from numba import njit, prange


@njit(cache=True, parallel=True)
def propagate_cells(qbar, delta, lams, y0, dy0, want_dlam):  # pragma: no cover
    m = lams.shape[0]
    ncell = qbar.shape[0]
    phi = np.empty(m)
    dphi = np.empty(m)
    phi_lam = np.zeros(m)
    dphi_lam = np.zeros(m)
    for j in prange(m):
        lam = lams[j]
        lam2 = lam * lam
        y = y0
        dy = dy0
        zy = 0.0
        zdy = 0.0
        for i in range(ncell):
            d = delta[i]
            tau = lam2 - qbar[i]
            t = tau * d * d
            if t > 1e-8:
                u = np.sqrt(t)
                C = np.cos(u)
                S = d * np.sin(u) / u
            elif t < -1e-8:
                u = np.sqrt(-t)
                C = np.cosh(u)
                S = d * np.sinh(u) / u
            else:
                C = 1.0 - t / 2.0 + t * t / 24.0
                S = d * (1.0 - t / 6.0 + t * t / 120.0)
            if want_dlam:
                # dC/dtau and dS/dtau; the series branch avoids 0/0 at tau ~ 0
                dCdt = -0.5 * d * S
                if t > 1e-4 or t < -1e-4:
                    dSdt = (d * C - S) / (2.0 * tau)
                else:
                    dSdt = d * d * d * (-1.0 / 6.0 + t / 60.0 - t * t / 1680.0)
                dlow = -(d * C + S) / 2.0  # d(-tau*S)/dtau
                zyn = C * zy + S * zdy + 2.0 * lam * (dCdt * y + dSdt * dy)
                zdyn = -tau * S * zy + C * zdy + 2.0 * lam * (dlow * y + dCdt * dy)
                zy = zyn
                zdy = zdyn
            yn = C * y + S * dy
            dyn = -tau * S * y + C * dy
            y = yn
            dy = dyn
        phi[j] = y
        dphi[j] = dy
        phi_lam[j] = zy
        dphi_lam[j] = zdy
    return phi, dphi, phi_lam, dphi_lam


def warmup():
    """Trigger JIT compilation once (cached across sessions)."""
    q = np.zeros(2)
    d = np.full(2, 0.25)
    lam = np.array([1.0])
    propagate_cells(q, d, lam, 1.0, 0.0, True)
    propagate_cells(q, d, lam, 1.0, 0.0, False)
