#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "topocbt/chain.hpp"

namespace topocbt {

enum class WalKind : std::uint8_t { undo = 0, abort = 1, commit = 2 };

std::string to_string(WalKind kind);

struct WalRecord {
    std::uint64_t sequence = 0;
    TxnId txn = 0;
    WalKind kind = WalKind::undo;
    BlockRef block;                      ///< undo only
    std::vector<std::uint8_t> snapshot;  ///< undo only: prior chain balances
    bool durable = false;

    bool terminal() const { return kind != WalKind::undo; }
    friend bool operator==(const WalRecord&, const WalRecord&) = default;
};

struct WalError : std::runtime_error {
    WalError(std::size_t index, const std::string& what)
        : std::runtime_error("WAL record " + std::to_string(index) + ": " + what),
          record_index(index) {}
    std::size_t record_index;
};

/// Throws WalError naming the first record that breaks ordering: sequence
/// numbers must strictly increase, and per txn no record may follow its
/// Commit or Abort.
void validate_wal(std::span<const WalRecord> records);

// On-disk layout, all integers big-endian:
//   u32 body length, then body =
//   u64 sequence | u64 txn | u8 kind
//   undo only: u32 chain | u32 height | u32 branch | u32 snapshot length | snapshot
std::vector<std::uint8_t> encode_record(const WalRecord& record);

/// Decodes a record stream. Records read back are durable. Throws WalError on
/// truncation, unknown kinds or out-of-order sequence numbers.
std::vector<WalRecord> decode_wal(std::span<const std::uint8_t> bytes);

/// Append-only log. A record is durable once append returns.
class Wal {
public:
    Wal() = default;
    explicit Wal(std::vector<WalRecord> records);

    const WalRecord& append_undo(TxnId txn, const BlockRef& block,
                                 std::vector<std::uint8_t> snapshot);
    const WalRecord& append_terminal(TxnId txn, WalKind kind);

    std::span<const WalRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

    std::vector<std::uint8_t> encode() const;
    std::size_t byte_size() const;
    /// Bytes of the records belonging to `txn`.
    std::size_t byte_size(TxnId txn) const;

    /// Keeps only the first `n` records; models the durable prefix at a crash.
    void truncate(std::size_t n);

private:
    std::uint64_t next_sequence() const;

    std::vector<WalRecord> records_;
};

}  // namespace topocbt
