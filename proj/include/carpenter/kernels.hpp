#pragma once

#include <span>

#include "carpenter/matrix.hpp"
#include "carpenter/tetris.hpp"

// Dense verification kernels. `serial` is the reference implementation kept
// for testing; `parallel` splits the outer loop across OpenMP threads and must
// return bit-identical results (max-reductions are order independent).
namespace carpenter::kernels {

namespace serial {
double symmetry_defect(MatrixView m);
double idempotence_defect(MatrixView m);  // max |(M M - M)_ij|
double gram_defect(std::span<const SparseRow> rows);  // max |<v_r, v_s> - delta_rs|
}  // namespace serial

namespace parallel {
double symmetry_defect(MatrixView m);
double idempotence_defect(MatrixView m);
double gram_defect(std::span<const SparseRow> rows);
}  // namespace parallel

}  // namespace carpenter::kernels
