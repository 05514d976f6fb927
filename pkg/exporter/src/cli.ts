#!/usr/bin/env node
import { parseArgs } from 'util'
import { exportFeatures } from './export.js'
import { DEFAULT_LAYER, DEFAULT_MODEL } from './model.js'

const USAGE = `usage: retouchq-export-features <image_dir> <out_dir> [--model NAME|PATH] [--layer NAME]

Writes one <stem>.ctxf per image: the activations of the requested feature
layer of a pretrained image classifier, in the CTXF v1 binary format.`

async function main(): Promise<number> {
  const { values, positionals } = parseArgs({
    options: {
      model: { type: 'string', default: DEFAULT_MODEL },
      layer: { type: 'string', default: DEFAULT_LAYER },
      help: { type: 'boolean', short: 'h', default: false },
    },
    allowPositionals: true,
  })
  if (values.help) {
    console.log(USAGE)
    return 0
  }
  if (positionals.length !== 2) {
    console.error(USAGE)
    return 2
  }
  const [imageDir, outDir] = positionals
  const result = await exportFeatures({
    imageDir,
    outDir,
    model: values.model!,
    layer: values.layer!,
  })
  console.log(`wrote ${result.written.length} feature files to ${outDir}`)
  if (result.skipped.length > 0) {
    console.error(`skipped ${result.skipped.length} unreadable file(s)`)
  }
  return 0
}

main()
  .then(code => {
    process.exitCode = code
  })
  .catch(err => {
    console.error(`error: ${(err as Error).message}`)
    process.exitCode = 1
  })
