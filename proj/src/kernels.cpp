#include "cadence/kernels.hpp"

#include <cmath>

namespace cadence::kernels {

namespace {
// Below this many multiply-adds the fork/join overhead dominates.
constexpr long kParallelThreshold = 16384;
}  // namespace

double dot(const double* a, const double* b, int n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    int i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void affine_forward(const double* W, int ldw, const double* bias, const double* X,
                    int ldx, double* Y, int ldy, int batch, int rows, int cols) {
    const long total = (long)batch * rows;
#pragma omp parallel for schedule(static) if (total * cols > kParallelThreshold)
    for (long idx = 0; idx < total; ++idx) {
        const int b = int(idx / rows);
        const int o = int(idx % rows);
        Y[(size_t)b * ldy + o] = dot(W + (size_t)o * ldw, X + (size_t)b * ldx, cols) + bias[o];
    }
}

void affine_backward(const double* W, int ldw, const double* X, int ldx,
                     const double* dY, int ldy, double* dW, double* dbias,
                     double* dX, int batch, int rows, int cols) {
    // dW and dbias: one output entry per (o,i) pair, serial over the batch.
#pragma omp parallel for schedule(static) if ((long)rows * cols * batch > kParallelThreshold)
    for (long idx = 0; idx < (long)rows * cols; ++idx) {
        const int o = int(idx / cols);
        const int i = int(idx % cols);
        double s = 0.0;
        for (int b = 0; b < batch; ++b) {
            s += dY[(size_t)b * ldy + o] * X[(size_t)b * ldx + i];
        }
        dW[(size_t)o * ldw + i] += s;
    }
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (int o = 0; o < rows; ++o) {
        double s = 0.0;
        for (int b = 0; b < batch; ++b) s += dY[(size_t)b * ldy + o];
        dbias[o] += s;
    }
    if (dX == nullptr) return;
#pragma omp parallel for schedule(static) if ((long)batch * cols * rows > kParallelThreshold)
    for (long idx = 0; idx < (long)batch * cols; ++idx) {
        const int b = int(idx / cols);
        const int i = int(idx % cols);
        double s = 0.0;
        for (int o = 0; o < rows; ++o) {
            s += dY[(size_t)b * ldy + o] * W[(size_t)o * ldw + i];
        }
        dX[(size_t)b * ldx + i] = s;
    }
}

void batch_stats(const double* X, int ldx, int batch, int rows, double* mean,
                 double* var) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (int c = 0; c < rows; ++c) {
        double m = 0.0;
        for (int b = 0; b < batch; ++b) m += X[(size_t)b * ldx + c];
        m /= batch;
        double v = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double d = X[(size_t)b * ldx + c] - m;
            v += d * d;
        }
        mean[c] = m;
        var[c] = v / batch;
    }
}

void bn_forward_train(const double* X, int ldx, const double* mean,
                      const double* var, const double* gamma, const double* beta,
                      double eps, double* Y, int ldy, double* xhat, int ldh,
                      int batch, int rows) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (int c = 0; c < rows; ++c) {
        const double inv = 1.0 / std::sqrt(var[c] + eps);
        for (int b = 0; b < batch; ++b) {
            const double h = (X[(size_t)b * ldx + c] - mean[c]) * inv;
            xhat[(size_t)b * ldh + c] = h;
            Y[(size_t)b * ldy + c] = gamma[c] * h + beta[c];
        }
    }
}

void bn_forward_infer(const double* X, int ldx, const double* running_mean,
                      const double* running_var, const double* gamma,
                      const double* beta, double eps, double* Y, int ldy,
                      int batch, int rows) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (int c = 0; c < rows; ++c) {
        const double inv = 1.0 / std::sqrt(running_var[c] + eps);
        for (int b = 0; b < batch; ++b) {
            Y[(size_t)b * ldy + c] =
                gamma[c] * (X[(size_t)b * ldx + c] - running_mean[c]) * inv + beta[c];
        }
    }
}

void bn_backward(const double* dY, int ldy, const double* xhat, int ldh,
                 const double* gamma, const double* var, double eps,
                 double* dgamma, double* dbeta, double* dX, int ldx, int batch,
                 int rows) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (int c = 0; c < rows; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double dy = dY[(size_t)b * ldy + c];
            sum_dy += dy;
            sum_dy_xhat += dy * xhat[(size_t)b * ldh + c];
        }
        dgamma[c] += sum_dy_xhat;
        dbeta[c] += sum_dy;
        const double inv = 1.0 / std::sqrt(var[c] + eps);
        const double k = gamma[c] * inv;
        const double mean_dy = sum_dy / batch;
        const double mean_dy_xhat = sum_dy_xhat / batch;
        for (int b = 0; b < batch; ++b) {
            dX[(size_t)b * ldx + c] =
                k * (dY[(size_t)b * ldy + c] - mean_dy -
                     xhat[(size_t)b * ldh + c] * mean_dy_xhat);
        }
    }
}

void relu_forward(const double* X, int ldx, double* Y, int ldy, int batch,
                  int rows) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (long idx = 0; idx < (long)batch * rows; ++idx) {
        const int b = int(idx / rows);
        const int c = int(idx % rows);
        const double x = X[(size_t)b * ldx + c];
        Y[(size_t)b * ldy + c] = x > 0.0 ? x : 0.0;
    }
}

void relu_backward(const double* Y, int ldy, const double* dY, int ldyg,
                   double* dX, int ldx, int batch, int rows) {
#pragma omp parallel for schedule(static) if ((long)rows * batch > kParallelThreshold)
    for (long idx = 0; idx < (long)batch * rows; ++idx) {
        const int b = int(idx / rows);
        const int c = int(idx % rows);
        dX[(size_t)b * ldx + c] =
            Y[(size_t)b * ldy + c] > 0.0 ? dY[(size_t)b * ldyg + c] : 0.0;
    }
}

namespace serial {

void affine_forward(const double* W, int ldw, const double* bias, const double* X,
                    int ldx, double* Y, int ldy, int batch, int rows, int cols) {
    for (int b = 0; b < batch; ++b) {
        for (int o = 0; o < rows; ++o) {
            Y[(size_t)b * ldy + o] =
                dot(W + (size_t)o * ldw, X + (size_t)b * ldx, cols) + bias[o];
        }
    }
}

void affine_backward(const double* W, int ldw, const double* X, int ldx,
                     const double* dY, int ldy, double* dW, double* dbias,
                     double* dX, int batch, int rows, int cols) {
    for (int o = 0; o < rows; ++o) {
        for (int i = 0; i < cols; ++i) {
            double s = 0.0;
            for (int b = 0; b < batch; ++b) {
                s += dY[(size_t)b * ldy + o] * X[(size_t)b * ldx + i];
            }
            dW[(size_t)o * ldw + i] += s;
        }
    }
    for (int o = 0; o < rows; ++o) {
        double s = 0.0;
        for (int b = 0; b < batch; ++b) s += dY[(size_t)b * ldy + o];
        dbias[o] += s;
    }
    if (dX == nullptr) return;
    for (int b = 0; b < batch; ++b) {
        for (int i = 0; i < cols; ++i) {
            double s = 0.0;
            for (int o = 0; o < rows; ++o) {
                s += dY[(size_t)b * ldy + o] * W[(size_t)o * ldw + i];
            }
            dX[(size_t)b * ldx + i] = s;
        }
    }
}

void batch_stats(const double* X, int ldx, int batch, int rows, double* mean,
                 double* var) {
    for (int c = 0; c < rows; ++c) {
        double m = 0.0;
        for (int b = 0; b < batch; ++b) m += X[(size_t)b * ldx + c];
        m /= batch;
        double v = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double d = X[(size_t)b * ldx + c] - m;
            v += d * d;
        }
        mean[c] = m;
        var[c] = v / batch;
    }
}

void bn_forward_train(const double* X, int ldx, const double* mean,
                      const double* var, const double* gamma, const double* beta,
                      double eps, double* Y, int ldy, double* xhat, int ldh,
                      int batch, int rows) {
    for (int c = 0; c < rows; ++c) {
        const double inv = 1.0 / std::sqrt(var[c] + eps);
        for (int b = 0; b < batch; ++b) {
            const double h = (X[(size_t)b * ldx + c] - mean[c]) * inv;
            xhat[(size_t)b * ldh + c] = h;
            Y[(size_t)b * ldy + c] = gamma[c] * h + beta[c];
        }
    }
}

void bn_forward_infer(const double* X, int ldx, const double* running_mean,
                      const double* running_var, const double* gamma,
                      const double* beta, double eps, double* Y, int ldy,
                      int batch, int rows) {
    for (int c = 0; c < rows; ++c) {
        const double inv = 1.0 / std::sqrt(running_var[c] + eps);
        for (int b = 0; b < batch; ++b) {
            Y[(size_t)b * ldy + c] =
                gamma[c] * (X[(size_t)b * ldx + c] - running_mean[c]) * inv + beta[c];
        }
    }
}

void bn_backward(const double* dY, int ldy, const double* xhat, int ldh,
                 const double* gamma, const double* var, double eps,
                 double* dgamma, double* dbeta, double* dX, int ldx, int batch,
                 int rows) {
    for (int c = 0; c < rows; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (int b = 0; b < batch; ++b) {
            const double dy = dY[(size_t)b * ldy + c];
            sum_dy += dy;
            sum_dy_xhat += dy * xhat[(size_t)b * ldh + c];
        }
        dgamma[c] += sum_dy_xhat;
        dbeta[c] += sum_dy;
        const double inv = 1.0 / std::sqrt(var[c] + eps);
        const double k = gamma[c] * inv;
        const double mean_dy = sum_dy / batch;
        const double mean_dy_xhat = sum_dy_xhat / batch;
        for (int b = 0; b < batch; ++b) {
            dX[(size_t)b * ldx + c] =
                k * (dY[(size_t)b * ldy + c] - mean_dy -
                     xhat[(size_t)b * ldh + c] * mean_dy_xhat);
        }
    }
}

void relu_forward(const double* X, int ldx, double* Y, int ldy, int batch,
                  int rows) {
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < rows; ++c) {
            const double x = X[(size_t)b * ldx + c];
            Y[(size_t)b * ldy + c] = x > 0.0 ? x : 0.0;
        }
    }
}

void relu_backward(const double* Y, int ldy, const double* dY, int ldyg,
                   double* dX, int ldx, int batch, int rows) {
    for (int b = 0; b < batch; ++b) {
        for (int c = 0; c < rows; ++c) {
            dX[(size_t)b * ldx + c] =
                Y[(size_t)b * ldy + c] > 0.0 ? dY[(size_t)b * ldyg + c] : 0.0;
        }
    }
}

}  // namespace serial

}  // namespace cadence::kernels
