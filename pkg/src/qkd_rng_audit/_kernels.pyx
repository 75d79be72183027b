# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled protocol pipeline kernels. Semantics match ``_fallback.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, int32_t, uint8_t

cnp.import_array()


cdef inline int64_t _toeplitz(const uint8_t* seed, const uint8_t* block, int m, int n_cols, int k) nogil:
    cdef int64_t key = 0
    cdef int r, c
    cdef uint8_t acc
    for r in range(k):
        acc = 0
        for c in range(m):
            acc ^= seed[r - c + n_cols - 1] & block[c]
        key = (key << 1) | acc
    return key


def toeplitz_hash(block, seed, int n_cols, int k):
    cdef const uint8_t[::1] blk = np.ascontiguousarray(block, dtype=np.uint8)
    cdef const uint8_t[::1] sd = np.ascontiguousarray(seed, dtype=np.uint8)
    if blk.shape[0] == 0:
        return 0
    return int(_toeplitz(&sd[0], &blk[0], blk.shape[0], n_cols, k))


def pipeline_batch(alice, bob, int n, int k, bint test_random, bint toeplitz, bint with_view):
    cdef const uint8_t[:, ::1] A = np.ascontiguousarray(alice, dtype=np.uint8)
    cdef const uint8_t[:, ::1] B = np.ascontiguousarray(bob, dtype=np.uint8)
    cdef Py_ssize_t rows = A.shape[0]
    key_np = np.full(rows, -1, dtype=np.int64)
    nt_np = np.zeros(rows, dtype=np.int32)
    nb_np = np.zeros(rows, dtype=np.int32)
    view_np = np.zeros(rows, dtype=np.int64)
    cdef int64_t[::1] key_out = key_np
    cdef int32_t[::1] nt_out = nt_np
    cdef int32_t[::1] nb_out = nb_np
    cdef int64_t[::1] view_out = view_np
    cdef int seed_off = 3 * n if test_random else 2 * n
    cdef int seed_len = n + k - 1 if toeplitz else 0
    block_np = np.zeros(max(n, 1), dtype=np.uint8)
    cdef uint8_t[::1] block = block_np
    cdef Py_ssize_t i
    cdef int j, c, m, n_test, n_sifted
    cdef bint is_test
    cdef int64_t test_mask, test_vals, code, key

    with nogil:
        for i in range(rows):
            m = 0
            n_test = 0
            n_sifted = 0
            test_mask = 0
            test_vals = 0
            for j in range(n):
                test_mask <<= 1
                test_vals <<= 1
                if A[i, n + j] != B[i, j]:
                    continue
                if test_random:
                    is_test = A[i, 2 * n + j] == 1
                else:
                    is_test = n_sifted % 2 == 0
                n_sifted += 1
                if is_test:
                    n_test += 1
                    test_mask |= 1
                    test_vals |= A[i, j]
                else:
                    block[m] = A[i, j]
                    m += 1
            nt_out[i] = n_test
            nb_out[i] = m
            if n_test > 0 and m > 0 and (toeplitz or m >= k):
                if toeplitz:
                    key_out[i] = _toeplitz(&A[i, seed_off], &block[0], m, n, k)
                else:
                    key = 0
                    for c in range(k):
                        key = (key << 1) | block[c]
                    key_out[i] = key
            if with_view:
                code = 0
                for j in range(n):
                    code = (code << 1) | A[i, n + j]
                for j in range(n):
                    code = (code << 1) | B[i, j]
                code = (code << n) | test_mask
                code = (code << n) | test_vals
                for j in range(seed_len):
                    code = (code << 1) | A[i, seed_off + j]
                view_out[i] = code
    return key_np, nt_np, nb_np, view_np
