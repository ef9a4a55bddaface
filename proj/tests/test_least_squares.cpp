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


#include <doctest.h>

#include <string>

#include "generators.hpp"
#include "irsq/least_squares.hpp"

using namespace irsq;

TEST_CASE("consistent systems are solved exactly")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 50; ++t)
    {
        const int r = gen::integer(rng, 1, 40);
        const int c = gen::integer(rng, 1, r);
        const CMatrix A = gen::cmat(rng, r, c);
        const CVector x = gen::cvec(rng, c);
        const CVector got = solve_least_squares(A, A * x);
        CHECK((got - x).norm() <= 1e-10 * x.norm());
    }
}

TEST_CASE("orthonormal columns reduce to the matched filter")
{
    std::mt19937_64 rng(22);
    for (int t = 0; t < 20; ++t)
    {
        const int r = gen::integer(rng, 4, 30);
        const int c = gen::integer(rng, 1, r);
        Eigen::HouseholderQR<CMatrix> qr(gen::cmat(rng, r, r));
        const CMatrix Q = CMatrix(qr.householderQ()).leftCols(c);
        const CVector b = gen::cvec(rng, r);
        CHECK((solve_least_squares(Q, b) - Q.adjoint() * b).norm() < 1e-12 * b.norm());
    }
}

TEST_CASE("residual is orthogonal to the column space")
{
    std::mt19937_64 rng(23);
    for (int t = 0; t < 50; ++t)
    {
        const int r = gen::integer(rng, 2, 40);
        const int c = gen::integer(rng, 1, r - 1);
        const CMatrix A = gen::cmat(rng, r, c);
        const CVector b = gen::cvec(rng, r);
        const CVector res = b - A * solve_least_squares(A, b);
        CHECK((A.adjoint() * res).norm() < 1e-10 * A.norm() * b.norm());
    }
}

TEST_CASE("rank deficiency reports the collinear pair")
{
    std::mt19937_64 rng(24);
    CMatrix A = gen::cmat(rng, 10, 4);
    A.col(3) = Complex(0.0, 2.0) * A.col(1);
    try
    {
        solve_least_squares(A, gen::cvec(rng, 10));
        FAIL("expected RankDeficientError");
    }
    catch (const RankDeficientError &e)
    {
        CHECK(e.column_a() == 1);
        CHECK(e.column_b() == 3);
        CHECK(std::string(e.what()).find("columns 1 and 3") != std::string::npos);
    }
}

TEST_CASE("underdetermined and malformed systems")
{
    std::mt19937_64 rng(25);
    CHECK_THROWS_AS(solve_least_squares(gen::cmat(rng, 3, 5), gen::cvec(rng, 3)), RankDeficientError);
    CHECK_THROWS_AS(solve_least_squares(gen::cmat(rng, 3, 2), gen::cvec(rng, 4)), Error);
    CHECK(solve_least_squares(CMatrix(3, 0), gen::cvec(rng, 3)).size() == 0);
    CHECK_THROWS_AS(solve_least_squares(CMatrix::Zero(4, 1), gen::cvec(rng, 4)), RankDeficientError);
}
