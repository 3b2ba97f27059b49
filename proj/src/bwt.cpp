// Block-sorting compressor: BWT, move-to-front, zero-run coding and an
// adaptive binary range coder. Only the output length matters to callers, so
// there is no decoder; the transform itself is checked against a naive
// rotation sort in the tests.

#include "ncdkit/compressor.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace ncdkit {

namespace {

constexpr std::size_t kBlockSize = 900000;
constexpr std::uint8_t kMagic[3] = {'B', 'W', '1'};

constexpr unsigned kRunA = 0;
constexpr unsigned kRunB = 1;
constexpr unsigned kEndOfBlock = 257;
constexpr unsigned kSymbolBits = 9;

void put_varint(Bytes& out, std::uint64_t v)
{
    while (v >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(v | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(v));
}

class RangeEncoder {
public:
    explicit RangeEncoder(Bytes& out) : out_(out) {}

    void encode_bit(std::uint16_t& prob, unsigned bit)
    {
        std::uint32_t bound = (range_ >> kProbBits) * prob;
        if (bit == 0) {
            range_ = bound;
            prob = static_cast<std::uint16_t>(prob + (((1u << kProbBits) - prob) >> kAdapt));
        } else {
            low_ += bound;
            range_ -= bound;
            prob = static_cast<std::uint16_t>(prob - (prob >> kAdapt));
        }
        while (range_ < (1u << 24)) {
            range_ <<= 8;
            shift_low();
        }
    }

    void flush()
    {
        for (int i = 0; i < 5; ++i)
            shift_low();
    }

    static constexpr unsigned kProbBits = 11;
    static constexpr unsigned kAdapt = 5;

private:
    void shift_low()
    {
        if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
            std::uint8_t carry = static_cast<std::uint8_t>(low_ >> 32);
            std::uint8_t temp = cache_;
            do {
                out_.push_back(static_cast<std::uint8_t>(temp + carry));
                temp = 0xFF;
            } while (--cache_size_ != 0);
            cache_ = static_cast<std::uint8_t>(low_ >> 24);
        }
        ++cache_size_;
        low_ = (low_ & 0x00FFFFFFu) << 8;
    }

    Bytes& out_;
    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
};

// Order-0 model: one bit tree over the 258-symbol alphabet, conditioned on
// whether the previous symbol was part of a zero run.
class SymbolModel {
public:
    SymbolModel() { reset(); }

    void reset()
    {
        for (auto& tree : trees_)
            tree.fill(1u << (RangeEncoder::kProbBits - 1));
        prev_run_ = 0;
    }

    void encode(RangeEncoder& rc, unsigned symbol)
    {
        auto& tree = trees_[prev_run_];
        unsigned node = 1;
        for (int b = kSymbolBits - 1; b >= 0; --b) {
            unsigned bit = (symbol >> b) & 1u;
            rc.encode_bit(tree[node], bit);
            node = (node << 1) | bit;
        }
        prev_run_ = symbol <= kRunB ? 1 : 0;
    }

private:
    std::array<std::array<std::uint16_t, 1u << kSymbolBits>, 2> trees_{};
    unsigned prev_run_ = 0;
};

// Zero runs of length L are written in bijective base 2 with digits
// RUNA (1) and RUNB (2), least significant first.
void emit_zero_run(std::vector<std::uint16_t>& symbols, std::size_t run)
{
    while (run > 0) {
        if (run & 1u) {
            symbols.push_back(kRunA);
            run = (run - 1) / 2;
        } else {
            symbols.push_back(kRunB);
            run = (run - 2) / 2;
        }
    }
}

std::vector<std::uint16_t> mtf_zero_run(ByteView last_column)
{
    std::array<std::uint8_t, 256> order{};
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::uint16_t> symbols;
    symbols.reserve(last_column.size() / 2 + 1);
    std::size_t zeros = 0;
    for (std::uint8_t c : last_column) {
        unsigned pos = 0;
        while (order[pos] != c)
            ++pos;
        if (pos == 0) {
            ++zeros;
            continue;
        }
        emit_zero_run(symbols, zeros);
        zeros = 0;
        std::copy_backward(order.begin(), order.begin() + pos, order.begin() + pos + 1);
        order[0] = c;
        symbols.push_back(static_cast<std::uint16_t>(pos + 1));
    }
    emit_zero_run(symbols, zeros);
    symbols.push_back(kEndOfBlock);
    return symbols;
}

} // namespace

namespace detail {

Bytes bwt_forward(ByteView block, std::uint32_t& primary)
{
    const std::size_t n = block.size();
    primary = 0;
    if (n == 0)
        return {};

    // Prefix doubling over cyclic shifts with counting sorts.
    std::vector<std::uint32_t> p(n), c(n), pn(n), cn(n);
    std::vector<std::uint32_t> cnt(std::max<std::size_t>(256, n), 0);
    for (std::size_t i = 0; i < n; ++i)
        ++cnt[block[i]];
    for (std::size_t i = 1; i < 256; ++i)
        cnt[i] += cnt[i - 1];
    for (std::size_t i = n; i-- > 0;)
        p[--cnt[block[i]]] = static_cast<std::uint32_t>(i);
    c[p[0]] = 0;
    std::uint32_t classes = 1;
    for (std::size_t i = 1; i < n; ++i) {
        if (block[p[i]] != block[p[i - 1]])
            ++classes;
        c[p[i]] = classes - 1;
    }

    for (std::size_t h = 1; h < n && classes < n; h <<= 1) {
        for (std::size_t i = 0; i < n; ++i)
            pn[i] = static_cast<std::uint32_t>((p[i] + n - h % n) % n);
        std::fill(cnt.begin(), cnt.begin() + classes, 0);
        for (std::size_t i = 0; i < n; ++i)
            ++cnt[c[pn[i]]];
        for (std::size_t i = 1; i < classes; ++i)
            cnt[i] += cnt[i - 1];
        for (std::size_t i = n; i-- > 0;)
            p[--cnt[c[pn[i]]]] = pn[i];
        cn[p[0]] = 0;
        classes = 1;
        for (std::size_t i = 1; i < n; ++i) {
            std::uint32_t cur0 = c[p[i]], prev0 = c[p[i - 1]];
            std::uint32_t cur1 = c[(p[i] + h) % n], prev1 = c[(p[i - 1] + h) % n];
            if (cur0 != prev0 || cur1 != prev1)
                ++classes;
            cn[p[i]] = classes - 1;
        }
        c.swap(cn);
    }

    Bytes last(n);
    for (std::size_t i = 0; i < n; ++i) {
        last[i] = block[(p[i] + n - 1) % n];
        if (p[i] == 0)
            primary = static_cast<std::uint32_t>(i);
    }
    return last;
}

} // namespace detail

Bytes bwt_compress(ByteView data)
{
    Bytes out(std::begin(kMagic), std::end(kMagic));
    put_varint(out, data.size());

    std::vector<Bytes> columns;
    for (std::size_t off = 0; off < data.size(); off += kBlockSize) {
        auto block = data.subspan(off, std::min(kBlockSize, data.size() - off));
        std::uint32_t primary = 0;
        columns.push_back(detail::bwt_forward(block, primary));
        put_varint(out, primary);
    }
    if (columns.empty())
        return out;

    RangeEncoder rc(out);
    SymbolModel model;
    for (const auto& column : columns) {
        model.reset();
        for (std::uint16_t s : mtf_zero_run(column))
            model.encode(rc, s);
    }
    rc.flush();
    return out;
}

} // namespace ncdkit
