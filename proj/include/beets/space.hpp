#ifndef BEETS_SPACE_HPP
#define BEETS_SPACE_HPP

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "beets/codec.hpp"

namespace beets {

inline constexpr std::int64_t kNever = -1;

struct StoredTuple {
    Tuple values;
    std::int64_t inserted_at{0};
    std::int64_t expires_at{kNever};  // kNever = unlimited lifetime
    std::string origin{"local"};
};

// True iff arities match and every pattern position is Formal or equal
// (numbers compared after Int16 -> Float32 promotion).
bool match_pattern(const Pattern& p, const Tuple& t);

// Per-arity sub-spaces ts_1..ts_4, multiset semantics, FIFO matching.
// All operations are linearizable; callers may use any thread.
class TupleSpace {
public:
    explicit TupleSpace(std::string name = "") : name_(std::move(name)) {}

    const std::string& name() const { return name_; }

    // lifetime_ms < 0 means unlimited.
    StoredTuple out(const Tuple& t, std::int64_t lifetime_ms, std::int64_t now,
                    const std::string& origin = "local");

    std::optional<Tuple> rd(const Pattern& p, std::int64_t now) const;
    std::optional<Tuple> inp(const Pattern& p, std::int64_t now);
    std::size_t rm(const Pattern& p, std::int64_t now);
    bool test(const Pattern& p, std::int64_t now) const;

    // Drops every tuple whose finite expiry lies before now.
    std::size_t expire_sweep(std::int64_t now);

    std::size_t size() const;
    std::vector<StoredTuple> snapshot() const;

private:
    static bool live(const StoredTuple& st, std::int64_t now) {
        return st.expires_at == kNever || st.expires_at >= now;
    }

    std::string name_;
    mutable std::mutex mu_;
    std::vector<StoredTuple> sub_[4];  // sub_[i] holds arity i+1
};

}  // namespace beets

#endif
