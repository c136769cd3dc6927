# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 stepper for the Maxwell-Bloch system.

Same calling convention as ``_mbcore_py.run_segment``; see that module for
the meaning of every argument.  Each RK stage is one fused pass along z:
the trapezoid sums for both fields and the atomic right-hand side are
accumulated together, with the stage input s + h k formed on the fly.
"""
import numpy as np

from libc.math cimport isfinite

cdef extern from "complex.h" nogil:
    double cabs(double complex)


cdef inline void _stage(const double complex* s, const double complex* p,
                        const double complex* ks, const double complex* kp, double h,
                        double complex eb, double complex epb, double om,
                        double g, double dz, double delta_hf, bint eit_only,
                        double complex G0, double complex G,
                        double complex* ds, double complex* dp,
                        double complex* e_last, double complex* ep_last,
                        Py_ssize_t n) noexcept nogil:
    # ks/kp may be NULL for the first stage (h ignored)
    cdef Py_ssize_t j
    cdef double complex ce = 0.5j * g * dz
    cdef double complex cs = -0.5j * g * (om / delta_hf) * dz
    cdef double complex iom = 1j * om
    cdef double complex cst = 1j * g * om / delta_hf
    cdef double complex ig = 1j * g
    cdef double complex e = eb, ep = epb
    cdef double complex sj, pj, sprev = 0.0, pprev = 0.0
    if eit_only:
        ep = 0.0
    for j in range(n):
        if ks != NULL:
            sj = s[j] + h * ks[j]
            pj = p[j] + h * kp[j]
        else:
            sj = s[j]
            pj = p[j]
        if j > 0:
            e = e + ce * (pprev + pj)
            if not eit_only:
                ep = ep + cs * (sprev + sj)
        ds[j] = -G0 * sj + iom * pj + cst * ep
        dp[j] = -G * pj + iom * sj + ig * e
        sprev = sj
        pprev = pj
    e_last[0] = e
    ep_last[0] = ep


cdef void _fields(const double complex* s, const double complex* p,
                  double complex eb, double complex epb, double om,
                  double g, double dz, double delta_hf, bint eit_only,
                  double complex[::1] e, double complex[::1] ep, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t j
    cdef double complex ce = 0.5j * g * dz
    cdef double complex cs = -0.5j * g * (om / delta_hf) * dz
    e[0] = eb
    ep[0] = 0.0 if eit_only else epb
    for j in range(1, n):
        e[j] = e[j - 1] + ce * (p[j - 1] + p[j])
        ep[j] = 0.0 if eit_only else ep[j - 1] + cs * (s[j - 1] + s[j])


def run_segment(double complex[::1] s, double complex[::1] p,
                const double complex[::1] eps_b, const double complex[::1] epsp_b,
                const double[::1] omega, const double[::1] shift, long k0, long nsteps,
                double dt, double dz, double g,
                double gamma0, double gamma, double delta, double delta_hf,
                bint eit_only,
                long trace_every, double complex[::1] trace_e, double complex[::1] trace_ep,
                long record_every, rec_s, rec_p, rec_e, rec_ep,
                bint record_last, double blowup):
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t j
    cdef long k, i, kg, r, last = nsteps + (1 if record_last else 0)
    cdef double half = 0.5 * dt, sixth = dt / 6.0
    cdef double complex e_last, ep_last, dummy_e, dummy_ep
    cdef double complex G00, G01, G02, G0, G1, G2
    cdef double complex[::1] work = np.empty(8 * n, dtype=complex)
    cdef double complex* sp = &s[0]
    cdef double complex* pp = &p[0]
    cdef double complex* k1s = &work[0]
    cdef double complex* k1p = &work[n]
    cdef double complex* k2s = &work[2 * n]
    cdef double complex* k2p = &work[3 * n]
    cdef double complex* k3s = &work[4 * n]
    cdef double complex* k3p = &work[5 * n]
    cdef double complex* k4s = &work[6 * n]
    cdef double complex* k4p = &work[7 * n]
    cdef double complex[::1] e = np.empty(n, dtype=complex)
    cdef double complex[::1] ep = np.empty(n, dtype=complex)
    cdef double complex[:, ::1] rs, rp, re_, rep
    cdef bint recording = record_every > 0
    if recording:
        rs = rec_s
        rp = rec_p
        re_ = rec_e
        rep = rec_ep

    with nogil:
        for k in range(last):
            i = 2 * k
            kg = k0 + k
            G00 = gamma0 - 1j * (delta - shift[i])
            G0 = gamma - 1j * (delta - 2.0 * shift[i])
            # stage 1 also yields the boundary-to-exit fields at t_k
            _stage(sp, pp, NULL, NULL, 0.0, eps_b[i], epsp_b[i], omega[i], g, dz, delta_hf,
                   eit_only, G00, G0, k1s, k1p, &e_last, &ep_last, n)
            if kg % trace_every == 0:
                trace_e[kg // trace_every] = e_last
                trace_ep[kg // trace_every] = ep_last
            if recording and kg % record_every == 0:
                r = kg // record_every
                _fields(sp, pp, eps_b[i], epsp_b[i], omega[i], g, dz, delta_hf, eit_only, e, ep, n)
                for j in range(n):
                    rs[r, j] = sp[j]
                    rp[r, j] = pp[j]
                    re_[r, j] = e[j]
                    rep[r, j] = ep[j]
            if cabs(e_last) > blowup or cabs(ep_last) > blowup or not isfinite(e_last.real):
                with gil:
                    return k
            if k == nsteps:
                break
            G01 = gamma0 - 1j * (delta - shift[i + 1])
            G02 = gamma0 - 1j * (delta - shift[i + 2])
            G1 = gamma - 1j * (delta - 2.0 * shift[i + 1])
            G2 = gamma - 1j * (delta - 2.0 * shift[i + 2])
            _stage(sp, pp, k1s, k1p, half, eps_b[i + 1], epsp_b[i + 1], omega[i + 1], g, dz,
                   delta_hf, eit_only, G01, G1, k2s, k2p, &dummy_e, &dummy_ep, n)
            _stage(sp, pp, k2s, k2p, half, eps_b[i + 1], epsp_b[i + 1], omega[i + 1], g, dz,
                   delta_hf, eit_only, G01, G1, k3s, k3p, &dummy_e, &dummy_ep, n)
            _stage(sp, pp, k3s, k3p, dt, eps_b[i + 2], epsp_b[i + 2], omega[i + 2], g, dz,
                   delta_hf, eit_only, G02, G2, k4s, k4p, &dummy_e, &dummy_ep, n)
            for j in range(n):
                sp[j] = sp[j] + sixth * (k1s[j] + 2.0 * (k2s[j] + k3s[j]) + k4s[j])
                pp[j] = pp[j] + sixth * (k1p[j] + 2.0 * (k2p[j] + k3p[j]) + k4p[j])
    return -1
