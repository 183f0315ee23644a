#include "beets/space.hpp"

#include <algorithm>
#include <stdexcept>

namespace beets {

bool match_pattern(const Pattern& p, const Tuple& t) {
    if (p.size() != t.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::holds_alternative<Formal>(p[i])) continue;
        if (!value_equal(p[i], t[i])) return false;
    }
    return true;
}

StoredTuple TupleSpace::out(const Tuple& t, std::int64_t lifetime_ms,
                            std::int64_t now, const std::string& origin) {
    if (t.empty() || t.size() > 4) throw std::runtime_error("bad arity");
    StoredTuple st;
    st.values = t;
    st.inserted_at = now;
    st.expires_at = lifetime_ms < 0 ? kNever : now + lifetime_ms;
    st.origin = origin;
    std::lock_guard lk(mu_);
    sub_[t.size() - 1].push_back(st);
    return st;
}

std::optional<Tuple> TupleSpace::rd(const Pattern& p, std::int64_t now) const {
    if (p.empty() || p.size() > 4) return std::nullopt;
    std::lock_guard lk(mu_);
    for (const StoredTuple& st : sub_[p.size() - 1])
        if (live(st, now) && match_pattern(p, st.values)) return st.values;
    return std::nullopt;
}

std::optional<Tuple> TupleSpace::inp(const Pattern& p, std::int64_t now) {
    if (p.empty() || p.size() > 4) return std::nullopt;
    std::lock_guard lk(mu_);
    auto& sub = sub_[p.size() - 1];
    for (auto it = sub.begin(); it != sub.end(); ++it) {
        if (live(*it, now) && match_pattern(p, it->values)) {
            Tuple t = std::move(it->values);
            sub.erase(it);
            return t;
        }
    }
    return std::nullopt;
}

std::size_t TupleSpace::rm(const Pattern& p, std::int64_t now) {
    if (p.empty() || p.size() > 4) return 0;
    std::lock_guard lk(mu_);
    auto& sub = sub_[p.size() - 1];
    std::size_t before = sub.size();
    std::erase_if(sub, [&](const StoredTuple& st) {
        return live(st, now) && match_pattern(p, st.values);
    });
    return before - sub.size();
}

bool TupleSpace::test(const Pattern& p, std::int64_t now) const {
    return rd(p, now).has_value();
}

std::size_t TupleSpace::expire_sweep(std::int64_t now) {
    std::lock_guard lk(mu_);
    std::size_t n = 0;
    for (auto& sub : sub_) {
        std::size_t before = sub.size();
        std::erase_if(sub, [&](const StoredTuple& st) {
            return st.expires_at != kNever && st.expires_at < now;
        });
        n += before - sub.size();
    }
    return n;
}

std::size_t TupleSpace::size() const {
    std::lock_guard lk(mu_);
    std::size_t n = 0;
    for (const auto& sub : sub_) n += sub.size();
    return n;
}

std::vector<StoredTuple> TupleSpace::snapshot() const {
    std::lock_guard lk(mu_);
    std::vector<StoredTuple> out;
    for (const auto& sub : sub_) out.insert(out.end(), sub.begin(), sub.end());
    return out;
}

}  // namespace beets
