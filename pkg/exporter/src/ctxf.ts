/** CTXF v1: "CTXF" magic, u32 LE version, u32 LE dim, dim float32 LE values. */

export const CTXF_MAGIC = 'CTXF'
export const CTXF_VERSION = 1
const HEADER_BYTES = 12

export function encodeCtxf(values: Float32Array): Buffer {
  if (values.length === 0) {
    throw new Error('context feature must not be empty')
  }
  for (let i = 0; i < values.length; i++) {
    if (!Number.isFinite(values[i])) {
      throw new Error('context feature values must be finite')
    }
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * values.length)
  buf.write(CTXF_MAGIC, 0, 'ascii')
  buf.writeUInt32LE(CTXF_VERSION, 4)
  buf.writeUInt32LE(values.length, 8)
  for (let i = 0; i < values.length; i++) {
    buf.writeFloatLE(values[i], HEADER_BYTES + 4 * i)
  }
  return buf
}

/** Strict decoder mirroring the consumer's validation; used by the tests. */
export function decodeCtxf(buf: Buffer): Float32Array {
  if (buf.length < HEADER_BYTES) {
    throw new Error('header shorter than 12 bytes')
  }
  if (buf.toString('ascii', 0, 4) !== CTXF_MAGIC) {
    throw new Error('bad magic')
  }
  const version = buf.readUInt32LE(4)
  if (version !== CTXF_VERSION) {
    throw new Error(`unsupported version ${version}`)
  }
  const dim = buf.readUInt32LE(8)
  if (dim === 0) {
    throw new Error('dim is zero')
  }
  const payload = buf.length - HEADER_BYTES
  if (payload < 4 * dim) {
    throw new Error('payload shorter than dim')
  }
  if (payload > 4 * dim) {
    throw new Error('payload longer than dim')
  }
  const values = new Float32Array(dim)
  for (let i = 0; i < dim; i++) {
    values[i] = buf.readFloatLE(HEADER_BYTES + 4 * i)
    if (!Number.isFinite(values[i])) {
      throw new Error('payload contains non-finite values')
    }
  }
  return values
}
