#ifndef PTMPS_PT_IO_HPP
#define PTMPS_PT_IO_HPP

#include <iosfwd>
#include <string>

#include "ptmps/pt.hpp"

namespace ptmps {

/// Binary process-tensor container, format tag "PTMP1".  Layout (all integers
/// little-endian):
///   magic   6 bytes  "PTMP1\0"
///   u32     version (1)
///   u8      mode (0 finite, 1 tti)
///   u32     d
///   f64     dt
///   u32     n_mem
///   u32     ramp_count   number of per-slot site tensors stored
///   u32     tensor_count total tensors following (tti: ramp + bulk + cap)
///   then per tensor: u32 rank, u32 extents[rank], f64 re/im pairs row-major.
/// Round trips are bit-exact.
void save_pt(const ProcessTensorMPS& pt, std::ostream& os);
void save_pt(const ProcessTensorMPS& pt, const std::string& path);

ProcessTensorMPS load_pt(std::istream& is);
ProcessTensorMPS load_pt(const std::string& path);

} // namespace ptmps

#endif
