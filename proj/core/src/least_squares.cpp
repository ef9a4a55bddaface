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

#include "irsq/least_squares.hpp"

#include <string>

namespace irsq
{
    namespace
    {
        std::pair<int, int> most_collinear_pair(const CMatrix &A)
        {
            int best_a = 0, best_b = A.cols() > 1 ? 1 : 0;
            double best = -1.0;
            for (Eigen::Index i = 0; i < A.cols(); ++i)
            {
                const double ni = A.col(i).norm();
                for (Eigen::Index j = i + 1; j < A.cols(); ++j)
                {
                    const double nj = A.col(j).norm();
                    double c = (ni > 0.0 && nj > 0.0) ? std::abs(A.col(i).dot(A.col(j))) / (ni * nj) : 1.0;
                    if (c > best)
                    {
                        best = c;
                        best_a = static_cast<int>(i);
                        best_b = static_cast<int>(j);
                    }
                }
            }
            return {best_a, best_b};
        }
    } // namespace

    CVector solve_least_squares(const CMatrix &A, const CVector &b)
    {
        if (A.rows() != b.size())
            throw Error("solve_least_squares: row mismatch");
        if (A.cols() == 0)
            return CVector(0);

        if (A.cols() > A.rows())
        {
            auto [ca, cb] = most_collinear_pair(A);
            throw RankDeficientError("least squares is underdetermined: " + std::to_string(A.cols()) +
                                         " columns, " + std::to_string(A.rows()) + " rows",
                                     ca, cb);
        }

        Eigen::ColPivHouseholderQR<CMatrix> qr(A);
        qr.setThreshold(kRankTolerance);
        if (qr.rank() < A.cols())
        {
            auto [ca, cb] = most_collinear_pair(A);
            throw RankDeficientError("rank-deficient working matrix (rank " + std::to_string(qr.rank()) + " < " +
                                         std::to_string(A.cols()) + "); columns " + std::to_string(ca) + " and " +
                                         std::to_string(cb) + " are nearly collinear",
                                     ca, cb);
        }
        return qr.solve(b);
    }

} // namespace irsq
