// SPDX-License-Identifier: Apache-2.0
//
// irsq - wideband IRS channel estimation under beam squint
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef IRSQ_LEAST_SQUARES_HPP
#define IRSQ_LEAST_SQUARES_HPP

#include "irsq/types.hpp"

namespace irsq
{
    class RankDeficientError : public Error
    {
    public:
        RankDeficientError(const std::string &what, int col_a, int col_b)
            : Error(what), col_a_(col_a), col_b_(col_b) {}

        // Working-matrix columns with the largest normalized overlap.
        int column_a() const { return col_a_; }
        int column_b() const { return col_b_; }

    private:
        int col_a_;
        int col_b_;
    };

    inline constexpr double kRankTolerance = 1e-10;

    /// Full-column-rank least squares min ||A x - b|| via column-pivoted QR.
    ///
    /// Throws RankDeficientError when the numerical rank (relative tolerance
    /// kRankTolerance) is below A.cols(), or when A has more columns than rows.
    CVector solve_least_squares(const CMatrix &A, const CVector &b);

} // namespace irsq

#endif
