import * as fs from 'fs'
import * as path from 'path'
import * as tf from '@tensorflow/tfjs'
import { encodeCtxf } from './ctxf.js'
import { DecodedImage, decodeImage, listImages } from './images.js'
import { INPUT_SIZE, MEAN_RGB, loadTruncatedModel } from './model.js'

export interface ExportOptions {
  imageDir: string
  outDir: string
  model: string
  layer: string
}

export interface ExportResult {
  written: string[]
  skipped: string[]
}

/** Resize to the canonical square input and subtract the dataset mean pixel. */
export function toModelInput(img: DecodedImage): tf.Tensor4D {
  return tf.tidy(() => {
    const pixels = tf.tensor3d(img.rgb, [img.height, img.width, 3], 'float32')
    const resized = tf.image.resizeBilinear(pixels, [INPUT_SIZE, INPUT_SIZE])
    return resized.sub(tf.tensor1d(MEAN_RGB)).expandDims(0) as tf.Tensor4D
  })
}

export function featureForImage(model: tf.LayersModel, img: DecodedImage): Float32Array {
  const input = toModelInput(img)
  try {
    const out = model.predict(input) as tf.Tensor
    try {
      return out.dataSync() as Float32Array
    } finally {
      out.dispose()
    }
  } finally {
    input.dispose()
  }
}

export async function exportFeatures(opts: ExportOptions): Promise<ExportResult> {
  const files = listImages(opts.imageDir)
  if (files.length === 0) {
    throw new Error(`no images found in ${opts.imageDir}`)
  }
  const model = await loadTruncatedModel(opts.model, opts.layer)
  fs.mkdirSync(opts.outDir, { recursive: true })

  const written: string[] = []
  const skipped: string[] = []
  for (const file of files) {
    let img: DecodedImage
    try {
      img = decodeImage(file)
    } catch (err) {
      console.warn(`warning: skipping ${path.basename(file)}: ${(err as Error).message}`)
      skipped.push(file)
      continue
    }
    const values = featureForImage(model, img)
    const stem = path.basename(file, path.extname(file))
    const target = path.join(opts.outDir, `${stem}.ctxf`)
    fs.writeFileSync(target, encodeCtxf(values)) // write failure is fatal by design
    written.push(target)
  }
  return { written, skipped }
}
