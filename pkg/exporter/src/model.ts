import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import * as tf from '@tensorflow/tfjs'

export const DEFAULT_MODEL = 'default-vgg-class'
export const DEFAULT_LAYER = 'fc6'
export const EXPECTED_DIM = 4096

/** Canonical classifier preprocessing: 224x224, mean-pixel subtraction, 0..255. */
export const INPUT_SIZE = 224
export const MEAN_RGB: [number, number, number] = [123.68, 116.779, 103.939]

function cacheDir(): string {
  return path.join(os.homedir(), '.cache', 'retouchq', 'vgg16')
}

export function downloadInstructions(model: string): string {
  return [
    `model "${model}" is not available locally.`,
    'Convert the pretrained classifier once and point --model at it:',
    '',
    '  pip install tensorflowjs',
    '  python -c "import tensorflow as tf; \\',
    "    tf.keras.applications.VGG16(weights='imagenet').save('vgg16.h5')\"",
    '  tensorflowjs_converter --input_format keras vgg16.h5 vgg16-tfjs/',
    '',
    `or place the converted model.json under ${cacheDir()}/.`,
  ].join('\n')
}

/** Read-side IOHandler so a tfjs-layers model on disk loads without tfjs-node. */
export function fileLoadHandler(modelJsonPath: string): tf.io.IOHandler {
  return {
    async load() {
      const dir = path.dirname(modelJsonPath)
      const modelJson = JSON.parse(fs.readFileSync(modelJsonPath, 'utf8'))
      const manifest = modelJson.weightsManifest as Array<{
        paths: string[]
        weights: tf.io.WeightsManifestEntry[]
      }>
      const weightSpecs: tf.io.WeightsManifestEntry[] = []
      const shards: Buffer[] = []
      for (const group of manifest) {
        weightSpecs.push(...group.weights)
        for (const p of group.paths) {
          shards.push(fs.readFileSync(path.join(dir, p)))
        }
      }
      const blob = Buffer.concat(shards)
      return {
        modelTopology: modelJson.modelTopology,
        format: modelJson.format,
        generatedBy: modelJson.generatedBy,
        convertedBy: modelJson.convertedBy,
        weightSpecs,
        weightData: blob.buffer.slice(blob.byteOffset, blob.byteOffset + blob.byteLength),
      }
    },
  }
}

/** Write-side IOHandler (model.json + weights.bin); used to stage test models. */
export function fileSaveHandler(outDir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts) {
      fs.mkdirSync(outDir, { recursive: true })
      const weightsName = 'weights.bin'
      const modelJson = {
        modelTopology: artifacts.modelTopology,
        format: artifacts.format,
        generatedBy: artifacts.generatedBy,
        convertedBy: artifacts.convertedBy,
        weightsManifest: [{ paths: [weightsName], weights: artifacts.weightSpecs }],
      }
      fs.writeFileSync(path.join(outDir, 'model.json'), JSON.stringify(modelJson))
      fs.writeFileSync(
        path.join(outDir, weightsName),
        Buffer.from(artifacts.weightData as ArrayBuffer),
      )
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: 'JSON' as const,
        },
      }
    },
  }
}

export function resolveModelPath(model: string): string {
  if (model === DEFAULT_MODEL) {
    const cached = path.join(cacheDir(), 'model.json')
    if (!fs.existsSync(cached)) {
      throw new Error(downloadInstructions(model))
    }
    return cached
  }
  const given = fs.existsSync(model) && fs.statSync(model).isDirectory()
    ? path.join(model, 'model.json')
    : model
  if (!fs.existsSync(given)) {
    throw new Error(downloadInstructions(model))
  }
  return given
}

/** Load the classifier and cut it at the requested feature layer. */
export async function loadTruncatedModel(
  model: string,
  layer: string,
): Promise<tf.LayersModel> {
  const full = await tf.loadLayersModel(fileLoadHandler(resolveModelPath(model)))
  let cut: tf.SymbolicTensor
  try {
    cut = full.getLayer(layer).output as tf.SymbolicTensor
  } catch {
    const names = full.layers.map(l => l.name).join(', ')
    throw new Error(`layer "${layer}" not found in model (layers: ${names})`)
  }
  return tf.model({ inputs: full.inputs, outputs: cut })
}
