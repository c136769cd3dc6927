"""Pure-numpy RK4 stepper for the Maxwell-Bloch system (fallback for ``_mbcore``).

Both implementations share one calling convention so ``mb_solver`` never
needs to know which one it got.  Boundary inputs and the control are sampled
on the half-step grid: index 2k is t_k, index 2k+1 is t_k + dt/2.  ``shift``
holds the instantaneous light shift |Omega'(t)|^2 / Delta_hf on the same grid,
so the complex decay rates follow the control field.

Each call advances ``s`` and ``p`` (modified in place) by ``nsteps`` steps.
Traces at z = 1 are written at global steps that are multiples of
``trace_every``; full (z, t) records at multiples of ``record_every``
(``record_every <= 0`` disables them).  The return value is -1 on success or
the local step index at which the blow-up threshold was crossed.
"""
import numpy as np


def _fields(s, p, eb, epb, om, g, dz, delta_hf, eit_only):
    e = np.empty_like(p)
    e[0] = eb
    np.cumsum(p[:-1] + p[1:], out=e[1:])
    e[1:] *= 0.5j * g * dz
    e[1:] += eb
    ep = np.empty_like(s)
    if eit_only:
        ep[:] = 0.0
    else:
        ep[0] = epb
        np.cumsum(s[:-1] + s[1:], out=ep[1:])
        ep[1:] *= -0.5j * g * (om / delta_hf) * dz
        ep[1:] += epb
    return e, ep


def _rhs(s, p, e, ep, om, g, Gamma0, Gamma, delta_hf):
    ds = -Gamma0 * s + 1j * om * p + (1j * g * om / delta_hf) * ep
    dp = -Gamma * p + 1j * om * s + (1j * g) * e
    return ds, dp


def run_segment(s, p, eps_b, epsp_b, omega, shift, k0, nsteps, dt, dz, g,
                gamma0, gamma, delta, delta_hf, eit_only,
                trace_every, trace_e, trace_ep,
                record_every, rec_s, rec_p, rec_e, rec_ep,
                record_last, blowup):
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(nsteps + (1 if record_last else 0)):
        i = 2 * k
        kg = k0 + k
        e, ep = _fields(s, p, eps_b[i], epsp_b[i], omega[i], g, dz, delta_hf, eit_only)
        if kg % trace_every == 0:
            j = kg // trace_every
            trace_e[j] = e[-1]
            trace_ep[j] = ep[-1]
        if record_every > 0 and kg % record_every == 0:
            j = kg // record_every
            rec_s[j] = s
            rec_p[j] = p
            rec_e[j] = e
            rec_ep[j] = ep
        if abs(e[-1]) > blowup or abs(ep[-1]) > blowup or not np.isfinite(e[-1]):
            return k
        if k == nsteps:
            break
        om0, om1, om2 = omega[i], omega[i + 1], omega[i + 2]
        G0 = [gamma0 - 1j * (delta - shift[i + m]) for m in range(3)]
        G = [gamma - 1j * (delta - 2.0 * shift[i + m]) for m in range(3)]
        k1s, k1p = _rhs(s, p, e, ep, om0, g, G0[0], G[0], delta_hf)
        s2 = s + half * k1s
        p2 = p + half * k1p
        e, ep = _fields(s2, p2, eps_b[i + 1], epsp_b[i + 1], om1, g, dz, delta_hf, eit_only)
        k2s, k2p = _rhs(s2, p2, e, ep, om1, g, G0[1], G[1], delta_hf)
        s3 = s + half * k2s
        p3 = p + half * k2p
        e, ep = _fields(s3, p3, eps_b[i + 1], epsp_b[i + 1], om1, g, dz, delta_hf, eit_only)
        k3s, k3p = _rhs(s3, p3, e, ep, om1, g, G0[1], G[1], delta_hf)
        s4 = s + dt * k3s
        p4 = p + dt * k3p
        e, ep = _fields(s4, p4, eps_b[i + 2], epsp_b[i + 2], om2, g, dz, delta_hf, eit_only)
        k4s, k4p = _rhs(s4, p4, e, ep, om2, g, G0[2], G[2], delta_hf)
        s += sixth * (k1s + 2.0 * (k2s + k3s) + k4s)
        p += sixth * (k1p + 2.0 * (k2p + k3p) + k4p)
    return -1
