import * as fs from 'fs'
import * as path from 'path'
import jpeg from 'jpeg-js'
import { PNG } from 'pngjs'

export interface DecodedImage {
  width: number
  height: number
  /** interleaved RGB, 0..255 */
  rgb: Uint8Array
}

const EXTENSIONS = new Set(['.png', '.jpg', '.jpeg'])

export function listImages(dir: string): string[] {
  return fs
    .readdirSync(dir)
    .filter(name => EXTENSIONS.has(path.extname(name).toLowerCase()))
    .sort()
    .map(name => path.join(dir, name))
}

function stripAlpha(rgba: Uint8Array, pixels: number): Uint8Array {
  const rgb = new Uint8Array(pixels * 3)
  for (let i = 0; i < pixels; i++) {
    rgb[3 * i] = rgba[4 * i]
    rgb[3 * i + 1] = rgba[4 * i + 1]
    rgb[3 * i + 2] = rgba[4 * i + 2]
  }
  return rgb
}

export function decodeImage(file: string): DecodedImage {
  const data = fs.readFileSync(file)
  const ext = path.extname(file).toLowerCase()
  if (ext === '.png') {
    const png = PNG.sync.read(data)
    return {
      width: png.width,
      height: png.height,
      rgb: stripAlpha(png.data, png.width * png.height),
    }
  }
  const img = jpeg.decode(data, { useTArray: true, maxMemoryUsageInMB: 1024 })
  return {
    width: img.width,
    height: img.height,
    rgb: stripAlpha(img.data, img.width * img.height),
  }
}
