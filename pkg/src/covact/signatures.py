"""Signature sequences on the complex sphere and their rank-one lift.

Each device transmits a length-L sequence drawn uniformly from the complex
sphere of radius sqrt(L).  Identifiability is governed not by the sequences
themselves but by their rank-one lift: column i of the lifted matrix is
conj(s_i) kron s_i, the vectorization of s_i s_i^H.  Because those matrices
are Hermitian, every lifted column is captured losslessly by an L^2-dim
*real* embedding (diagonal entries, then sqrt(2)-scaled real and imaginary
parts of the strict upper triangle), which keeps all downstream null-space
algebra real and preserves inner products:

    dot(W_i, W_k) == |s_i^H s_k|^2
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class SignatureSet:
    """Complex sequence matrix with columns of norm sqrt(L)."""

    matrix: np.ndarray  # (L, count) complex

    @property
    def length(self):
        return self.matrix.shape[0]

    @property
    def count(self):
        return self.matrix.shape[1]

    @property
    def column_norms(self):
        return np.linalg.norm(self.matrix, axis=0)


@dataclass(frozen=True)
class LiftedSignatures:
    """Rank-one lift of a signature set.

    Attributes
    ----------
    s_tilde : ndarray, shape (L^2, count), complex
        Column i equals conj(s_i) kron s_i.
    w : ndarray, shape (L^2, count), float
        Real Hermitian embedding of the same rank-one matrices.
    """

    s_tilde: np.ndarray
    w: np.ndarray


def sample_sphere_sequences(length, count, rng):
    """Draw ``count`` i.i.d. sequences uniform on the complex sphere of radius sqrt(L).

    Standard complex Gaussian columns rescaled to norm sqrt(L); uniformity
    follows from rotation invariance of the Gaussian.
    """
    if length < 1 or count < 1:
        raise ParameterError("length and count must be positive")
    z = rng.standard_normal((length, count)) + 1j * rng.standard_normal((length, count))
    z *= np.sqrt(length) / np.linalg.norm(z, axis=0)
    return SignatureSet(z)


def hermitian_embedding(matrix):
    """Map columns s to real vectors representing s s^H.

    Layout: L diagonal entries, then sqrt(2)*Re and sqrt(2)*Im of the strict
    upper triangle in row-major (numpy ``triu_indices``) order.
    """
    L, n = matrix.shape
    iu, ju = np.triu_indices(L, k=1)
    upper = matrix[iu] * matrix[ju].conj()  # (s s^H)[i, j] for i < j
    w = np.empty((L * L, n))
    w[:L] = np.abs(matrix) ** 2
    w[L:L + iu.size] = np.sqrt(2.0) * upper.real
    w[L + iu.size:] = np.sqrt(2.0) * upper.imag
    return w


def build_lift(sigs):
    """Build the rank-one lift and its real Hermitian embedding."""
    S = sigs.matrix
    L, n = S.shape
    s_tilde = (S.conj()[:, None, :] * S[None, :, :]).reshape(L * L, n)
    return LiftedSignatures(s_tilde, hermitian_embedding(S))
