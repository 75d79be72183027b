"""Pure-Python implementation of the protocol pipeline kernels.

Mirrors ``_kernels.pyx`` line for line; used when the extension is not built
or when ``QKD_RNG_AUDIT_PURE_PYTHON=1``.
"""

import numpy as np


def toeplitz_hash(block, seed, n_cols, k):
    """Multiply ``block`` by the ``k x n_cols`` Toeplitz matrix built from ``seed``.

    ``T[r, c] = seed[r - c + n_cols - 1]``; only the first ``len(block)``
    columns are used. Returns the key as an integer, leftmost bit first.
    """
    m = len(block)
    key = 0
    for r in range(k):
        acc = 0
        for c in range(m):
            acc ^= seed[r - c + n_cols - 1] & block[c]
        key = (key << 1) | acc
    return key


def pipeline_batch(alice, bob, n, k, test_random, toeplitz, with_view):
    """Run the deterministic part of the protocol on every row.

    Returns ``(key, n_test, n_block, view)`` arrays; ``key`` is -1 for
    degenerate rows (no test bits, no key bits, or too few key bits when
    hashing is off).
    """
    alice = np.asarray(alice, dtype=np.uint8)
    bob = np.asarray(bob, dtype=np.uint8)
    rows = alice.shape[0]
    key_out = np.full(rows, -1, dtype=np.int64)
    nt_out = np.zeros(rows, dtype=np.int32)
    nb_out = np.zeros(rows, dtype=np.int32)
    view_out = np.zeros(rows, dtype=np.int64)
    seed_off = 3 * n if test_random else 2 * n
    seed_len = n + k - 1 if toeplitz else 0

    for i in range(rows):
        a = alice[i].tolist()
        b = bob[i].tolist()
        block = []
        test_mask = 0
        test_vals = 0
        n_test = 0
        n_sifted = 0
        for j in range(n):
            test_mask <<= 1
            test_vals <<= 1
            if a[n + j] != b[j]:
                continue
            if test_random:
                is_test = a[2 * n + j] == 1
            else:
                is_test = n_sifted % 2 == 0
            n_sifted += 1
            if is_test:
                n_test += 1
                test_mask |= 1
                test_vals |= a[j]
            else:
                block.append(a[j])
        m = len(block)
        nt_out[i] = n_test
        nb_out[i] = m
        if n_test > 0 and m > 0 and (toeplitz or m >= k):
            if toeplitz:
                key_out[i] = toeplitz_hash(block, a[seed_off : seed_off + seed_len], n, k)
            else:
                key = 0
                for c in range(k):
                    key = (key << 1) | block[c]
                key_out[i] = key
        if with_view:
            code = 0
            for j in range(n):
                code = (code << 1) | a[n + j]
            for j in range(n):
                code = (code << 1) | b[j]
            code = (code << n) | test_mask
            code = (code << n) | test_vals
            for j in range(seed_len):
                code = (code << 1) | a[seed_off + j]
            view_out[i] = code
    return key_out, nt_out, nb_out, view_out
