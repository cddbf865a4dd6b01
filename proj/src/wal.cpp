#include "topocbt/wal.hpp"

#include <map>

namespace topocbt {

std::string to_string(WalKind kind) {
    switch (kind) {
    case WalKind::undo: return "undo";
    case WalKind::abort: return "abort";
    case WalKind::commit: return "commit";
    }
    return "?";
}

void validate_wal(std::span<const WalRecord> records) {
    std::map<TxnId, bool> finished;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (i > 0 && r.sequence <= records[i - 1].sequence)
            throw WalError(i, "sequence " + std::to_string(r.sequence) + " does not follow " +
                                  std::to_string(records[i - 1].sequence));
        if (finished[r.txn])
            throw WalError(i, to_string(r.kind) + " after terminal record of txn " +
                                  std::to_string(r.txn));
        if (r.terminal())
            finished[r.txn] = true;
    }
}

std::vector<std::uint8_t> encode_record(const WalRecord& record) {
    ByteWriter body;
    body.u64(record.sequence);
    body.u64(record.txn);
    body.u8(static_cast<std::uint8_t>(record.kind));
    if (record.kind == WalKind::undo) {
        body.u32(record.block.chain);
        body.u32(record.block.height);
        body.u32(record.block.branch);
        body.u32(static_cast<std::uint32_t>(record.snapshot.size()));
        body.bytes(record.snapshot);
    }
    ByteWriter out;
    out.u32(static_cast<std::uint32_t>(body.data().size()));
    out.bytes(body.data());
    return out.take();
}

std::vector<WalRecord> decode_wal(std::span<const std::uint8_t> bytes) {
    std::vector<WalRecord> out;
    ByteReader in(bytes);
    while (!in.done()) {
        const std::size_t index = out.size();
        try {
            const auto len = in.u32();
            ByteReader body(in.bytes(len));
            WalRecord r;
            r.sequence = body.u64();
            r.txn = body.u64();
            const auto kind = body.u8();
            if (kind > 2)
                throw WalError(index, "unknown kind tag " + std::to_string(kind));
            r.kind = static_cast<WalKind>(kind);
            if (r.kind == WalKind::undo) {
                r.block.chain = body.u32();
                r.block.height = body.u32();
                r.block.branch = body.u32();
                const auto n = body.u32();
                auto snap = body.bytes(n);
                r.snapshot.assign(snap.begin(), snap.end());
            }
            if (!body.done())
                throw WalError(index, "trailing bytes in record body");
            r.durable = true;
            if (!out.empty() && r.sequence <= out.back().sequence)
                throw WalError(index, "out-of-order sequence " + std::to_string(r.sequence));
            out.push_back(std::move(r));
        } catch (const DecodeError& e) {
            throw WalError(index, e.what());
        }
    }
    return out;
}

Wal::Wal(std::vector<WalRecord> records) : records_(std::move(records)) {
    validate_wal(records_);
}

std::uint64_t Wal::next_sequence() const {
    return records_.empty() ? 1 : records_.back().sequence + 1;
}

const WalRecord& Wal::append_undo(TxnId txn, const BlockRef& block,
                                  std::vector<std::uint8_t> snapshot) {
    records_.push_back(WalRecord{next_sequence(), txn, WalKind::undo, block, std::move(snapshot),
                                 true});
    return records_.back();
}

const WalRecord& Wal::append_terminal(TxnId txn, WalKind kind) {
    if (kind == WalKind::undo)
        throw std::invalid_argument("append_terminal: undo is not terminal");
    records_.push_back(WalRecord{next_sequence(), txn, kind, {}, {}, true});
    return records_.back();
}

std::vector<std::uint8_t> Wal::encode() const {
    std::vector<std::uint8_t> out;
    for (const auto& r : records_) {
        auto b = encode_record(r);
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

std::size_t Wal::byte_size() const {
    std::size_t n = 0;
    for (const auto& r : records_)
        n += encode_record(r).size();
    return n;
}

std::size_t Wal::byte_size(TxnId txn) const {
    std::size_t n = 0;
    for (const auto& r : records_)
        if (r.txn == txn)
            n += encode_record(r).size();
    return n;
}

void Wal::truncate(std::size_t n) {
    if (n < records_.size())
        records_.resize(n);
}

}  // namespace topocbt
