import * as fs from 'fs'
import * as path from 'path'
import * as tf from '@tensorflow/tfjs'
import { PNG } from 'pngjs'
import { EXPECTED_DIM, INPUT_SIZE, fileSaveHandler } from '../src/model.js'

/** Small stand-in for the converted classifier: same input contract, same
 * 4096-wide "fc6" feature layer, tiny weight count so tests stay fast. */
export async function stageStubModel(dir: string): Promise<void> {
  const model = tf.sequential()
  model.add(
    tf.layers.avgPooling2d({
      inputShape: [INPUT_SIZE, INPUT_SIZE, 3],
      poolSize: 28,
      strides: 28,
    }),
  )
  model.add(tf.layers.flatten())
  model.add(tf.layers.dense({ units: EXPECTED_DIM, activation: 'relu', name: 'fc6' }))
  model.add(tf.layers.dense({ units: 10, activation: 'softmax', name: 'predictions' }))
  await model.save(fileSaveHandler(dir))
}

export function writePng(
  file: string,
  width: number,
  height: number,
  seed: number,
  opts: { lo?: number; hi?: number } = {},
): void {
  const { lo = 0, hi = 255 } = opts
  const png = new PNG({ width, height })
  // deterministic pseudo-random pixels (LCG), so re-exports can be compared
  let state = seed >>> 0
  const next = () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0
    return lo + ((state & 0xff) % (hi - lo + 1))
  }
  for (let i = 0; i < width * height; i++) {
    png.data[4 * i] = next()
    png.data[4 * i + 1] = next()
    png.data[4 * i + 2] = next()
    png.data[4 * i + 3] = 255
  }
  fs.mkdirSync(path.dirname(file), { recursive: true })
  fs.writeFileSync(file, PNG.sync.write(png))
}
