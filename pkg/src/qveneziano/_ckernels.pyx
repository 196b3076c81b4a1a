# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled prefix-product sweeps.

Same contract as ``_pykernels``; moduli must be below ``MAX_MODULUS``.
Residues are carried as unsigned 64-bit integers and multiplied through a
128-bit intermediate (plain 64-bit when the modulus fits in 32 bits).
"""

cdef extern from *:
    """
    static inline unsigned long long qv_mulmod(unsigned long long a,
                                               unsigned long long b,
                                               unsigned long long m) {
        return (unsigned long long)(((unsigned __int128)a * b) % m);
    }
    """
    unsigned long long qv_mulmod(unsigned long long a, unsigned long long b,
                                 unsigned long long m) nogil

ctypedef unsigned long long u64

MAX_MODULUS = 2**63


cdef inline u64 _mulmod(u64 a, u64 b, u64 m, bint small) noexcept nogil:
    if small:
        return (a * b) % m
    return qv_mulmod(a, b, m)


def unit_prefix_products(u64 p, u64 modulus, checkpoints):
    cdef u64 prod = 1 % modulus
    cdef u64 m = 1
    cdef u64 mm = 1 % modulus   # m mod modulus
    cdef u64 r = 1 % p          # m mod p
    cdef u64 stop
    cdef bint small = modulus < 4294967296ULL
    out = []
    for c in checkpoints:
        stop = c
        with nogil:
            while m < stop:
                if r != 0:
                    prod = _mulmod(prod, mm, modulus, small)
                m += 1
                mm += 1
                if mm == modulus:
                    mm = 0
                r += 1
                if r == p:
                    r = 0
        out.append(prod)
    return out


def qint_prefix_products(u64 p, u64 q, u64 modulus, checkpoints):
    cdef u64 prod = 1 % modulus
    cdef u64 s = 0
    cdef u64 qq = q % modulus
    cdef u64 qpow = 1 % modulus
    cdef u64 m = 1
    cdef u64 r = 1 % p
    cdef u64 stop
    cdef bint small = modulus < 4294967296ULL
    out = []
    for c in checkpoints:
        stop = c
        with nogil:
            while m < stop:
                s += qpow
                if s >= modulus:
                    s -= modulus
                qpow = _mulmod(qpow, qq, modulus, small)
                if r != 0:
                    prod = _mulmod(prod, s, modulus, small)
                m += 1
                r += 1
                if r == p:
                    r = 0
        out.append(prod)
    return out
