#pragma once

#include "qprism/base_ring.hpp"

namespace qprism {

// Length-2 Witt vectors over any ring element type E providing +, -, *, scaled(i64), pow(unsigned).
template <class E>
struct Witt2 {
    E x0;
    E x1;
};

template <class E>
Witt2<E> witt2_add(int p, const Witt2<E>& a, const Witt2<E>& b) {
    E x1 = a.x1 + b.x1;
    for (int i = 1; i <= p - 1; ++i) {
        E term = a.x0.pow(i) * b.x0.pow(p - i);
        x1 = x1 - term.scaled(binom(p, i) / p);
    }
    return Witt2<E>{a.x0 + b.x0, x1};
}

template <class E>
Witt2<E> witt2_mul(int p, const Witt2<E>& a, const Witt2<E>& b) {
    E x1 = a.x0.pow(p) * b.x1 + a.x1 * b.x0.pow(p) + (a.x1 * b.x1).scaled(p);
    return Witt2<E>{a.x0 * b.x0, x1};
}

// Checks (x, dx)(y, dy) = (xy, d(xy)) and (x, dx) + (y, dy) = (x+y, d(x+y)) at level L-1.
template <class E, class DeltaFn, class EqFn>
bool witt2_hom_check(int p, const E& x, const E& y, DeltaFn&& d, EqFn&& eq) {
    Witt2<E> wx{x, d(x)}, wy{y, d(y)};
    Witt2<E> s = witt2_add(p, wx, wy);
    Witt2<E> m = witt2_mul(p, wx, wy);
    E sum = x + y, prod = x * y;
    return eq(s.x0, sum) && eq(s.x1, d(sum)) && eq(m.x0, prod) && eq(m.x1, d(prod));
}

}  // namespace qprism
