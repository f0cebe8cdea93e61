#pragma once

#include <cstddef>

// Batched dense-layer primitives. The OpenMP versions parallelize over
// independent output entries while every floating-point reduction runs in a
// fixed serial order, so results are bitwise identical to the serial
// reference regardless of thread count. Matrices are row-major with an
// explicit leading dimension so slimmed layers can address a width slice of
// the full parameter block in place.

namespace cadence::kernels {

// Fixed-order dot product shared by the serial and parallel paths.
double dot(const double* a, const double* b, int n);

// Y[b,o] = dot(W[o, :cols], X[b, :cols]) + bias[o]
void affine_forward(const double* W, int ldw, const double* bias, const double* X,
                    int ldx, double* Y, int ldy, int batch, int rows, int cols);

// dW[o,i] += sum_b dY[b,o] * X[b,i]
// dbias[o] += sum_b dY[b,o]
// dX[b,i]  = sum_o dY[b,o] * W[o,i]   (skipped when dX is null)
void affine_backward(const double* W, int ldw, const double* X, int ldx,
                     const double* dY, int ldy, double* dW, double* dbias,
                     double* dX, int batch, int rows, int cols);

// Per-channel mean and biased variance over the batch.
void batch_stats(const double* X, int ldx, int batch, int rows, double* mean,
                 double* var);

// xhat = (x - mean) / sqrt(var + eps); y = gamma * xhat + beta.
// xhat is stored for the backward pass (leading dimension ldh).
void bn_forward_train(const double* X, int ldx, const double* mean,
                      const double* var, const double* gamma, const double* beta,
                      double eps, double* Y, int ldy, double* xhat, int ldh,
                      int batch, int rows);

// y = gamma * (x - running_mean) / sqrt(running_var + eps) + beta.
void bn_forward_infer(const double* X, int ldx, const double* running_mean,
                      const double* running_var, const double* gamma,
                      const double* beta, double eps, double* Y, int ldy,
                      int batch, int rows);

// Batch-statistics backward. dgamma/dbeta accumulate; dX is written.
void bn_backward(const double* dY, int ldy, const double* xhat, int ldh,
                 const double* gamma, const double* var, double eps,
                 double* dgamma, double* dbeta, double* dX, int ldx, int batch,
                 int rows);

void relu_forward(const double* X, int ldx, double* Y, int ldy, int batch,
                  int rows);

// dX = dY where the forward output was positive, else 0.
void relu_backward(const double* Y, int ldy, const double* dY, int ldyg,
                   double* dX, int ldx, int batch, int rows);

// Plain single-threaded reference implementations, kept for tests and the
// kernel benchmark. Identical arithmetic, no pragmas.
namespace serial {

void affine_forward(const double* W, int ldw, const double* bias, const double* X,
                    int ldx, double* Y, int ldy, int batch, int rows, int cols);
void affine_backward(const double* W, int ldw, const double* X, int ldx,
                     const double* dY, int ldy, double* dW, double* dbias,
                     double* dX, int batch, int rows, int cols);
void batch_stats(const double* X, int ldx, int batch, int rows, double* mean,
                 double* var);
void bn_forward_train(const double* X, int ldx, const double* mean,
                      const double* var, const double* gamma, const double* beta,
                      double eps, double* Y, int ldy, double* xhat, int ldh,
                      int batch, int rows);
void bn_forward_infer(const double* X, int ldx, const double* running_mean,
                      const double* running_var, const double* gamma,
                      const double* beta, double eps, double* Y, int ldy,
                      int batch, int rows);
void bn_backward(const double* dY, int ldy, const double* xhat, int ldh,
                 const double* gamma, const double* var, double eps,
                 double* dgamma, double* dbeta, double* dX, int ldx, int batch,
                 int rows);
void relu_forward(const double* X, int ldx, double* Y, int ldy, int batch,
                  int rows);
void relu_backward(const double* Y, int ldy, const double* dY, int ldyg,
                   double* dX, int ldx, int batch, int rows);

}  // namespace serial

}  // namespace cadence::kernels
